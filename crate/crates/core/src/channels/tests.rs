use proptest::prelude::*;

use super::*;
use crate::linalg::{
    max_entangled, min_eigenvalue, partial_trace, partial_transpose, pauli, permute_subsystems, rank, DimSpec,
    Operator, C64,
};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn plus() -> Operator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Operator::outer(&Operator::column(&[c(s), c(s)]))
}

/// Choi of a product extension `σ^A ⊗ Λ^B`, written entry by entry in `(C′, A, B)` order.
fn product_choi_oracle(j: &Operator, d_c: usize, d_b: usize, sigma: &Operator) -> Operator {
    let d_a = sigma.rows();
    let n = d_c * d_a * d_b;
    Operator::from_fn(n, n, |r, col| {
        let (i, a, b) = (r / (d_a * d_b), (r / d_b) % d_a, r % d_b);
        let (i2, a2, b2) = (col / (d_a * d_b), (col / d_b) % d_a, col % d_b);
        j[(i * d_b + b, i2 * d_b + b2)] * sigma[(a, a2)]
    })
}

#[test]
fn identity_kraus_gives_max_entangled() {
    for d in 1..=3 {
        let ch = choi_from_kraus(&KrausSet::new(vec![Operator::identity(d)]).unwrap()).unwrap();
        assert!(ch.choi().distance(&max_entangled(d)) < 1e-14);
        assert!((ch.choi().trace().re - 1.0).abs() < 1e-14);
    }
}

#[test]
fn reset_channel_choi_is_product() {
    let k0 = Operator::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
    let k1 = Operator::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
    let ch = choi_from_kraus(&KrausSet::new(vec![k0, k1]).unwrap()).unwrap();
    let expected = Operator::identity(2).scale(0.5).kron(&Operator::basis_projector(2, 0));
    assert!(ch.choi().distance(&expected) < 1e-14);
}

#[test]
fn amplitude_damping_matches_elementwise_choi() {
    let g: f64 = 0.5;
    let ch = Channel::amplitude_damping(g).unwrap();
    let mut oracle = Operator::zeros(4, 4);
    oracle[(0, 0)] = c(0.5);
    oracle[(0, 3)] = c((1.0 - g).sqrt() / 2.0);
    oracle[(3, 0)] = c((1.0 - g).sqrt() / 2.0);
    oracle[(2, 2)] = c(g / 2.0);
    oracle[(3, 3)] = c((1.0 - g) / 2.0);
    assert!(ch.choi().distance(&oracle) < 1e-14);
    let spectrum = crate::linalg::eig_hermitian(ch.choi()).unwrap().values;
    for (got, want) in spectrum.iter().zip([0.0, 0.0, 0.25, 0.75]) {
        assert!((got - want).abs() < 1e-12, "{spectrum:?}");
    }
}

#[test]
fn kraus_of_identity_is_identity() {
    let k = kraus_from_choi(&Channel::identity(3)).unwrap();
    assert_eq!(k.len(), 1);
    assert!(k.operators()[0].distance(&Operator::identity(3)) < 1e-10);
}

#[test]
fn kraus_round_trip_on_random_channel() {
    let mut rng = seeded_rng(7);
    let ch = random_channel(2, 2, 3, &mut rng).unwrap();
    let k = kraus_from_choi(&ch).unwrap();
    assert_eq!(k.len(), rank(ch.choi(), 1e-9));
    assert_eq!(k.len(), 3);
    let back = choi_from_kraus(&k).unwrap();
    assert!(back.choi().distance(ch.choi()) < 1e-8);
}

#[test]
fn trivial_dilation_of_identity() {
    let v = stinespring_from_kraus(&KrausSet::new(vec![Operator::identity(2)]).unwrap()).unwrap();
    assert_eq!((v.d_a(), v.d_b()), (1, 2));
    assert!(v.v().distance(&Operator::identity(2)) < 1e-15);
    let comp = complementary(&v.extension());
    assert_eq!(comp.out_dim(), 1);
    assert_eq!(eb_check(&comp), EbStatus::EbCertified);
    assert!(comp.choi().distance(&Operator::identity(2).scale(0.5)) < 1e-14);
}

#[test]
fn dephasing_dilation_is_isometric_and_consistent() {
    let k = KrausSet::dephasing(0.5).unwrap();
    let v = stinespring_from_kraus(&k).unwrap();
    let gram = v.v().adjoint().matmul(v.v());
    assert!(gram.distance(&Operator::identity(2)) < 1e-12);
    let ext = v.extension();
    let b = marginal(&ext, Party::B);
    assert!(b.choi().distance(Channel::dephasing(0.5).unwrap().choi()) < 1e-10);

    // Complementary channel from Kraus operators: ρ ↦ Σ_ij Tr(K_i ρ K_j†) |i⟩⟨j|.
    let comp = complementary(&ext);
    let mut rng = seeded_rng(3);
    let rho = random_state(2, &mut rng);
    let ops = k.operators();
    let direct = Operator::from_fn(2, 2, |i, j| ops[i].matmul(&rho).matmul(&ops[j].adjoint()).trace());
    assert!(comp.apply(&rho, 1).unwrap().distance(&direct) < 1e-12);
}

#[test]
fn apply_examples() {
    let mut rng = seeded_rng(5);
    let rho = random_state(3, &mut rng);
    assert!(Channel::identity(3).apply(&rho, 1).unwrap().distance(&rho) < 1e-12);

    let sigma = random_state(2, &mut rng);
    let fixed = Channel::fixed_output(3, &sigma).unwrap();
    assert!(fixed.apply(&rho, 1).unwrap().distance(&sigma) < 1e-12);

    let ext = identity_with_constant(2, &sigma).unwrap();
    let out = ext.channel().apply(&plus(), 1).unwrap();
    assert!(out.distance(&plus().kron(&sigma)) < 1e-12);
}

#[test]
fn apply_with_ancilla_preserves_trace_and_acts_locally() {
    let mut rng = seeded_rng(8);
    let ch = random_channel(2, 3, 2, &mut rng).unwrap();
    let a = random_state(2, &mut rng);
    let b = random_state(2, &mut rng);
    let out = ch.apply(&a.kron(&b), 2).unwrap();
    assert!((out.trace().re - 1.0).abs() < 1e-10);
    assert!(out.distance(&ch.apply(&a, 1).unwrap().kron(&b)) < 1e-12);
}

#[test]
fn apply_rejects_unnormalized_input() {
    let ch = Channel::identity(2);
    assert!(ch.apply(&Operator::identity(2), 1).is_err());
    assert!(ch.apply(&Operator::identity(3).scale(1.0 / 3.0), 1).is_err());
}

#[test]
fn constant_copy_extension_marginals() {
    let sigma = Operator::basis_projector(2, 1);
    let ext = identity_with_constant(2, &sigma).unwrap();
    assert!(complementary(&ext).choi().distance(&max_entangled(2)) < 1e-10);
    let b = marginal(&ext, Party::B);
    assert!(b.choi().distance(Channel::fixed_output(2, &sigma).unwrap().choi()) < 1e-12);
}

#[test]
fn single_member_incoherent_is_product() {
    let mut rng = seeded_rng(11);
    let ch = random_channel(2, 2, 2, &mut rng).unwrap();
    let sigma = random_state(3, &mut rng);
    let ext = incoherent_extension(&Instrument::trivial(&ch), std::slice::from_ref(&sigma)).unwrap();
    assert_eq!(ext.origin(), ExtensionOrigin::Incoherent);
    let oracle = product_choi_oracle(ch.choi(), 2, 2, &sigma);
    assert!(ext.choi().distance(&oracle) < 1e-13);
}

#[test]
fn incoherent_extension_output_is_explicitly_separable() {
    let mut rng = seeded_rng(12);
    let inst = random_instrument(2, 2, 3, &mut rng).unwrap();
    let states: Vec<_> = (0..3).map(|_| random_state(2, &mut rng)).collect();
    let ext = incoherent_extension(&inst, &states).unwrap();
    assert!(marginal(&ext, Party::B).choi().distance(inst.total().choi()) < 1e-12);
    let rho = random_state(2, &mut rng);
    let parts = super::IncoherentParts::new(inst, states).unwrap();
    let sum: Operator = parts.decompose_output(&rho).unwrap().iter().map(|(a, b)| a.kron(b)).sum();
    assert!(sum.distance(&ext.channel().apply(&rho, 1).unwrap()) < 1e-12);
}

#[test]
fn incoherent_extension_rejects_bad_states() {
    let inst = Instrument::trivial(&Channel::identity(2));
    assert!(incoherent_extension(&inst, &[]).is_err());
    assert!(incoherent_extension(&inst, &[Operator::identity(2)]).is_err());
    assert!(incoherent_extension(&inst, &[pauli::z()]).is_err());
}

#[test]
fn pointer_of_identity_instrument() {
    let ext = pointer_extension(&Instrument::trivial(&Channel::identity(2)));
    assert_eq!(ext.d_a(), 1);
    assert!(ext.choi().distance(&max_entangled(2)) < 1e-14);
}

#[test]
fn measure_and_keep_pointer_is_diagonal() {
    let p0 = Operator::basis_projector(2, 0);
    let p1 = Operator::basis_projector(2, 1);
    let inst = Instrument::from_kraus_groups(&[vec![p0], vec![p1]]).unwrap();
    let ext = pointer_extension(&inst);
    let mut oracle = Operator::zeros(8, 8);
    oracle[(0, 0)] = c(0.5);
    oracle[(7, 7)] = c(0.5);
    assert!(ext.choi().distance(&oracle) < 1e-14);
}

#[test]
fn pointer_extension_is_ppt_across_alice() {
    let mut rng = seeded_rng(13);
    for _ in 0..10 {
        let inst = random_instrument(2, 2, 3, &mut rng).unwrap();
        let ext = pointer_extension(&inst);
        let pt = partial_transpose(ext.choi(), &ext.choi_dims(), 1).unwrap();
        assert!(min_eigenvalue(&pt) >= -1e-8);
    }
}

#[test]
fn kraus_pointer_extensions() {
    let triv = kraus_pointer_extension(&KrausSet::new(vec![Operator::identity(2)]).unwrap()).unwrap();
    assert!(triv.choi().distance(&max_entangled(2)) < 1e-14);

    let ad = KrausSet::amplitude_damping(0.3).unwrap();
    let ext = kraus_pointer_extension(&ad).unwrap();
    assert!(marginal(&ext, Party::B).choi().distance(Channel::amplitude_damping(0.3).unwrap().choi()) < 1e-12);
    // Compare with the product of its own marginals: the flag is correlated with the input.
    let rho_a = partial_trace(ext.choi(), &ext.choi_dims(), &[1]).unwrap();
    let product = product_choi_oracle(marginal(&ext, Party::B).choi(), 2, 2, &rho_a);
    assert!(ext.choi().distance(&product) > 1e-2);
}

#[test]
fn convex_extension_equals_kraus_pointer_of_mixture() {
    let id = Channel::identity(2);
    let z = Channel::unitary(&pauli::z()).unwrap();
    let ext = channel_convex_extension(&[id, z], &[0.5, 0.5]).unwrap();
    let kp = kraus_pointer_extension(&KrausSet::dephasing(0.5).unwrap()).unwrap();
    assert!(ext.choi().distance(kp.choi()) < 1e-13);
    assert!(channel_convex_extension(&[Channel::identity(2)], &[0.9]).is_err());

    let single = channel_convex_extension(&[Channel::identity(2)], &[1.0]).unwrap();
    assert!(single.choi().distance(&max_entangled(2)) < 1e-14);
}

#[test]
fn complementary_of_incoherent_is_measure_and_prepare() {
    let mut rng = seeded_rng(17);
    for _ in 0..10 {
        let inst = random_instrument(2, 2, 2, &mut rng).unwrap();
        let states: Vec<_> = (0..2).map(|_| random_state(2, &mut rng)).collect();
        let ext = incoherent_extension(&inst, &states).unwrap();
        let comp = complementary(&ext);
        let povm = povm_from_instrument(&inst);
        // Choi of ρ ↦ Σ_λ Tr(M_λ ρ) σ_λ is (1/d) Σ_λ M_λᵀ ⊗ σ_λ.
        let oracle: Operator = povm.iter().zip(&states).map(|(m, s)| m.transpose().scale(0.5).kron(s)).sum();
        assert!(comp.choi().distance(&oracle) < 1e-12);
        assert_eq!(eb_check(&comp), EbStatus::EbCertified);
    }
}

#[test]
fn eb_check_examples() {
    assert_eq!(eb_check(&Channel::identity(2)), EbStatus::NotEb);
    let fixed = Channel::fixed_output(2, &Operator::basis_projector(2, 0)).unwrap();
    assert_eq!(eb_check(&fixed), EbStatus::EbCertified);
    let big = Channel::fixed_output(3, &Operator::identity(3).scale(1.0 / 3.0)).unwrap();
    assert_eq!(eb_check(&big), EbStatus::Inconclusive);
}

#[test]
fn povm_examples() {
    let m = povm_from_instrument(&Instrument::trivial(&Channel::identity(2)));
    assert_eq!(m.len(), 1);
    assert!(m[0].distance(&Operator::identity(2)) < 1e-14);

    let p = [Operator::basis_projector(2, 0), Operator::basis_projector(2, 1)];
    let luders = Instrument::from_kraus_groups(&[vec![p[0].clone()], vec![p[1].clone()]]).unwrap();
    let m = povm_from_instrument(&luders);
    assert!(m[0].distance(&p[0]) < 1e-14 && m[1].distance(&p[1]) < 1e-14);
}

#[test]
fn povm_completeness_and_kraus_formula() {
    let mut rng = seeded_rng(19);
    let k = random_kraus(3, 2, 6, &mut rng).unwrap();
    let groups: Vec<Vec<Operator>> = k.operators().chunks(2).map(|g| g.to_vec()).collect();
    let inst = Instrument::from_kraus_groups(&groups).unwrap();
    let povm = povm_from_instrument(&inst);
    let total: Operator = povm.iter().cloned().sum();
    assert!(total.distance(&Operator::identity(3)) < 1e-9);
    for (m, g) in povm.iter().zip(&groups) {
        let direct: Operator = g.iter().map(|op| op.adjoint().matmul(op)).sum();
        assert!(m.distance(&direct) < 1e-12);
        assert!(min_eigenvalue(m) >= -1e-9);
    }
}

#[test]
fn random_extension_properties() {
    let ext = random_extension(2, 1, 2, 4).unwrap();
    assert_eq!(ext.d_a(), 1);
    assert_eq!(eb_check(&complementary(&ext)), EbStatus::EbCertified);
    for seed in 0..100 {
        let mut rng = seeded_rng(seed);
        let v = random_isometry(2, 4, &mut rng).unwrap();
        assert!(v.adjoint().matmul(&v).distance(&Operator::identity(2)) < 1e-10);
        let ext = random_extension(2, 2, 2, seed).unwrap();
        let b = marginal(&ext, Party::B);
        let reduced = partial_trace(b.choi(), &DimSpec::new(vec![2, 2]).unwrap(), &[0]).unwrap();
        assert!(reduced.distance(&Operator::identity(2).scale(0.5)) < 1e-9);
    }
    assert!(random_extension(3, 1, 2, 0).is_err());
}

#[test]
fn random_extension_is_deterministic() {
    assert_eq!(random_extension(2, 2, 2, 42).unwrap(), random_extension(2, 2, 2, 42).unwrap());
}

#[test]
fn identity_channel_instruments_are_proportional_to_identity() {
    let mut rng = seeded_rng(23);
    let pi = max_entangled(2);
    for _ in 0..20 {
        // Compress a random POVM on C′⊗B into the support of ψ₊.
        let q = random_povm(4, 3, &mut rng).unwrap();
        let members: Vec<Subchannel> = q
            .iter()
            .map(|qa| Subchannel::from_choi(pi.matmul(qa).matmul(&pi), 2, 2).unwrap())
            .collect();
        let inst = Instrument::new(members).unwrap();
        assert!(inst.total().choi().distance(&max_entangled(2)) < 1e-9);
        for m in inst.members() {
            let weight = m.choi().trace().re;
            assert!(m.choi().distance(&max_entangled(2).scale(weight)) < 1e-8);
        }
    }
}

#[test]
fn invalid_chois_are_rejected() {
    let d = DimSpec::new(vec![2]).unwrap();
    assert!(Channel::from_choi(Operator::identity(4), 2, d.clone()).is_err());
    assert!(Channel::from_choi(partial_transpose(&max_entangled(2), &DimSpec::new(vec![2, 2]).unwrap(), 1).unwrap(), 2, d.clone()).is_err());
    assert!(Channel::from_choi(Operator::identity(3), 2, d).is_err());
    assert!(KrausSet::new(vec![Operator::identity(2), Operator::identity(2)]).is_err());
}

#[test]
fn process_alice_with_identity_is_noop() {
    let ext = random_extension(2, 2, 2, 9).unwrap();
    let same = process_alice(&ext, &Channel::identity(2)).unwrap();
    assert!(same.choi().distance(ext.choi()) < 1e-12);
    let traced = process_alice(&ext, &Channel::fixed_output(2, &Operator::basis_projector(2, 0)).unwrap()).unwrap();
    assert!(marginal(&traced, Party::B).choi().distance(marginal(&ext, Party::B).choi()) < 1e-12);
}

#[test]
fn json_round_trips() {
    let mut rng = seeded_rng(29);
    let ch = random_channel(2, 3, 2, &mut rng).unwrap();
    let back: Channel = serde_json::from_str(&serde_json::to_string(&ch).unwrap()).unwrap();
    assert!(back.choi().distance(ch.choi()) < 1e-15);

    let inst = random_instrument(2, 2, 2, &mut rng).unwrap();
    let back: Instrument = serde_json::from_str(&serde_json::to_string(&inst).unwrap()).unwrap();
    assert_eq!(back.len(), 2);

    let ext = pointer_extension(&inst);
    let json = serde_json::to_string(&ext).unwrap();
    assert!(json.contains("\"origin\":\"incoherent\""));
    let back: ChannelExtension = serde_json::from_str(&json).unwrap();
    assert_eq!(back.origin(), ExtensionOrigin::Incoherent);

    let k = KrausSet::amplitude_damping(0.2).unwrap();
    let back: KrausSet = serde_json::from_str(&serde_json::to_string(&k).unwrap()).unwrap();
    assert_eq!(back.len(), 2);

    let bad = r#"{"choi":{"rows":1,"cols":1,"data":[[2.0,0.0]]},"d_in":1,"d_out":[1]}"#;
    assert!(serde_json::from_str::<Channel>(bad).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn representation_round_trip_fixed_point(seed in 0u64..1_000_000, d_in in 1usize..4, d_out in 1usize..4, r in 1usize..4) {
        let mut rng = seeded_rng(seed);
        let ch = random_channel(d_in, d_out, r, &mut rng).unwrap();
        let k = kraus_from_choi(&ch).unwrap();
        let once = choi_from_kraus(&k).unwrap();
        let twice = choi_from_kraus(&kraus_from_choi(&once).unwrap()).unwrap();
        prop_assert!(once.choi().distance(ch.choi()) < 1e-8);
        prop_assert!(twice.choi().distance(once.choi()) < 1e-8);
        let v = stinespring_from_kraus(&k).unwrap();
        prop_assert!(marginal(&v.extension(), Party::B).choi().distance(ch.choi()) < 1e-9);
    }

    #[test]
    fn extension_marginals_are_partial_traces(seed in 0u64..1_000_000, d_a in 1usize..4, d_b in 2usize..4) {
        let ext = random_extension(2, d_a, d_b, seed).unwrap();
        let dims = ext.choi_dims();
        let full = partial_trace(ext.choi(), &dims, &[0]).unwrap();
        prop_assert!(full.distance(&Operator::identity(2).scale(0.5)) < 1e-9);
        for (party, keep) in [(Party::A, [0usize, 1]), (Party::B, [0, 2])] {
            let direct = partial_trace(ext.choi(), &dims, &keep).unwrap();
            prop_assert!(marginal(&ext, party).choi().distance(&direct) < 1e-12);
        }
    }

    #[test]
    fn incoherent_extensions_are_ppt_across_alice(seed in 0u64..1_000_000, members in 2usize..5, d in 2usize..4) {
        let mut rng = seeded_rng(seed);
        let inst = random_instrument(d, d, members, &mut rng).unwrap();
        let states: Vec<_> = (0..members).map(|_| random_state(2, &mut rng)).collect();
        let ext = incoherent_extension(&inst, &states).unwrap();
        let pt = partial_transpose(ext.choi(), &ext.choi_dims(), 1).unwrap();
        prop_assert!(min_eigenvalue(&pt) >= -1e-8);
        let (swapped, _) = permute_subsystems(ext.choi(), &ext.choi_dims(), &[1, 0, 2]).unwrap();
        prop_assert!((swapped.trace().re - 1.0).abs() < 1e-12);
    }
}
