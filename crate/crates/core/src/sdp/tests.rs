use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&m + m.transpose()) * 0.5
}

fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &m * m.transpose() + DMatrix::identity(n, n) * 0.5
}

/// Strictly feasible primal and dual by construction.
fn random_problem(seed: u64, blocks: &[usize], m: usize) -> SdpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = SdpProblem::new(blocks.to_vec());
    let x0: Vec<_> = blocks.iter().map(|&n| random_pd(&mut rng, n)).collect();
    let mut c: Vec<_> = blocks.iter().map(|&n| random_pd(&mut rng, n)).collect();
    for _ in 0..m {
        let yi: f64 = rng.random_range(-1.0..1.0);
        let mut con = Constraint::new(0.0);
        let mut rhs = 0.0;
        for (b, &n) in blocks.iter().enumerate() {
            let a = random_sym(&mut rng, n);
            rhs += a.dot(&x0[b]);
            c[b] += &a * yi;
            con = con.term(b, SymMatrix::from_dense(&a, 0.0).unwrap());
        }
        con.rhs = rhs;
        p.push(con);
    }
    for (b, cb) in c.iter().enumerate() {
        p.set_objective(b, SymMatrix::from_dense(cb, 0.0).unwrap());
    }
    p
}

#[test]
fn single_entry_objective() {
    // min X11 s.t. Tr X = 1 over 2×2 PSD: optimum 0 at X = E22.
    let mut p = SdpProblem::new(vec![2]);
    p.set_objective(0, SymMatrix::new(2).with(0, 0, 1.0));
    p.push(Constraint::new(1.0).term(0, SymMatrix::identity(2)));
    let s = solve(&p).unwrap();
    assert_eq!(s.status, SdpStatus::Optimal);
    assert!(s.primal_objective.abs() < 1e-7);
    assert!((s.x[0][(1, 1)] - 1.0).abs() < 1e-6);
}

#[test]
fn largest_eigenvalue_of_pauli_x() {
    // max ⟨σx, X⟩ s.t. Tr X = 1 gives λmax(σx) = 1; the dual reads t with tI − σx ⪰ 0.
    let mut p = SdpProblem::new(vec![2]);
    p.set_objective(0, SymMatrix::new(2).with(0, 1, -1.0));
    p.push(Constraint::new(1.0).term(0, SymMatrix::identity(2)));
    let s = solve(&p).unwrap();
    assert_eq!(s.status, SdpStatus::Optimal);
    assert!((s.primal_objective + 1.0).abs() < 1e-7);
    assert!((s.y[0] + 1.0).abs() < 1e-7);
}

#[test]
fn unit_trace_feasibility_returns_psd_point() {
    let mut p = SdpProblem::new(vec![3]);
    p.push(Constraint::new(1.0).term(0, SymMatrix::identity(3)));
    let r = check_feasible(&p).unwrap();
    let FeasibilityOutcome::Feasible(x) = r.outcome else { panic!("expected feasible") };
    assert!((x[0].trace() - 1.0).abs() < 1e-7);
    let lmin = x[0].clone().symmetric_eigenvalues().min();
    assert!(lmin > -1e-8);
}

#[test]
fn negative_trace_is_infeasible_with_certificate() {
    let mut p = SdpProblem::new(vec![3]);
    p.push(Constraint::new(-1.0).term(0, SymMatrix::identity(3)));
    let r = check_feasible(&p).unwrap();
    let FeasibilityOutcome::Infeasible(cert) = r.outcome else { panic!("expected infeasible") };
    assert!(cert.b_dot_y > 0.0);
    assert!(cert.epsilon > 1e-8);
    let re = FarkasCertificate::evaluate(&p, cert.y.clone());
    assert!((re.epsilon - cert.epsilon).abs() < 1e-12);

    let s = solve(&p).unwrap();
    assert_eq!(s.status, SdpStatus::Infeasible);
    assert!(s.farkas.unwrap().is_valid(1e-8));
}

#[test]
fn inconsistent_linear_system_is_infeasible() {
    let mut p = SdpProblem::new(vec![2]);
    p.push(Constraint::new(1.0).term(0, SymMatrix::new(2).with(0, 0, 1.0)));
    p.push(Constraint::new(2.0).term(0, SymMatrix::new(2).with(0, 0, 1.0)));
    let r = check_feasible(&p).unwrap();
    assert!(!r.is_feasible());
}

#[test]
fn redundant_constraints_are_tolerated() {
    let mut p = SdpProblem::new(vec![2]);
    p.set_objective(0, SymMatrix::new(2).with(0, 0, 1.0));
    p.push(Constraint::new(1.0).term(0, SymMatrix::identity(2)));
    p.push(Constraint::new(2.0).term(0, SymMatrix::new(2).with(0, 0, 2.0).with(1, 1, 2.0)));
    let s = solve(&p).unwrap();
    assert_eq!(s.status, SdpStatus::Optimal);
    assert!(s.primal_objective.abs() < 1e-7);
}

#[test]
fn random_three_block_kkt() {
    for seed in 0..5 {
        let p = random_problem(seed, &[3, 4, 2], 8);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal, "seed {seed}");
        assert!(s.residuals.0 <= 1e-7 && s.residuals.1 <= 1e-7, "seed {seed}: {:?}", s.residuals);
        assert!(s.gap <= 1e-7, "seed {seed}: gap {}", s.gap);
        assert!(s.complementarity <= 1e-7);
        let (xmin, zmin) = s.min_eigenvalues();
        assert!(xmin > -1e-9 && zmin > -1e-9);
    }
}

#[test]
fn phase1_on_random_feasible_system() {
    let p0 = random_problem(11, &[3, 2], 5);
    let mut p = SdpProblem::new(p0.blocks.clone());
    p.constraints = p0.constraints.clone();
    let r = check_feasible(&p).unwrap();
    let FeasibilityOutcome::Feasible(x) = &r.outcome else { panic!("expected feasible") };
    assert!(r.max_violation < 1e-7);
    for b in x {
        assert!(b.clone().symmetric_eigenvalues().min() > -1e-8);
    }
}

#[test]
fn objective_rejected_by_feasibility_check() {
    let mut p = SdpProblem::new(vec![1]);
    p.set_objective(0, SymMatrix::identity(1));
    assert!(check_feasible(&p).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn weak_duality_and_complementarity(seed in 0u64..10_000, m in 1usize..7) {
        let p = random_problem(seed, &[2, 3], m);
        let s = solve(&p).unwrap();
        prop_assert_eq!(s.status, SdpStatus::Optimal);
        // Weak duality on the returned (feasible up to residual) pair.
        let slack = 1e-7 * (1.0 + s.primal_objective.abs());
        prop_assert!(s.primal_objective - s.dual_objective >= -slack);
        prop_assert!(s.complementarity.abs() <= 1e-7 * (1.0 + s.primal_objective.abs()));
        // Dual feasibility: Z = C − 𝒜*(y) must be PSD.
        let aty = p.adjoint_map(&s.y);
        for (b, a) in aty.iter().enumerate() {
            let z = p.objective[b].to_dense() - a;
            prop_assert!(z.symmetric_eigenvalues().min() > -1e-7);
        }
    }

    #[test]
    fn farkas_certificates_are_verified(shift in 0.1f64..5.0, n in 1usize..4) {
        let mut p = SdpProblem::new(vec![n, 2]);
        p.push(Constraint::new(-shift).term(0, SymMatrix::identity(n)).term(1, SymMatrix::identity(2)));
        let r = check_feasible(&p).unwrap();
        match r.outcome {
            FeasibilityOutcome::Infeasible(c) => prop_assert!(c.is_valid(1e-8)),
            FeasibilityOutcome::Feasible(_) => prop_assert!(false, "negative trace accepted"),
        }
    }
}
