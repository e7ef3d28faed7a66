//! Noiseless subchannel tomography from black-box access to an extension
//! together with Alice's announced outcomes.
//!
//! Two probing strategies are offered. Ancilla mode feeds one maximally
//! entangled input and reads the Choi operators off directly. Product mode
//! feeds a spanning set of input states and inverts the action by least
//! squares.

use nalgebra::DMatrix;

use crate::channels::{ChannelExtension, Subchannel};
use crate::error::{Error, Result};
use crate::linalg::{max_entangled, permute_subsystems, rank, to_nalgebra, DimSpec, Operator, C64};
use crate::par::{self, Execution};
use crate::steering::{ChannelAssemblage, MeasurementAssemblage};
use crate::tol;

const RANK_THRESHOLD: f64 = 1e-9;
const ZERO_PROBABILITY: f64 = 1e-14;

/// Alice's outcome for setting `x` together with Bob's conditional output.
pub type Outcome = (f64, Operator);

/// Evaluator `(input on C ⊗ D, x) ↦ [(p(a|x), ρ_B D|a,x)]_a`.
///
/// Conditional outputs are unit trace; outcomes of probability zero carry
/// the maximally mixed state.
pub trait BlackBox: Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn settings(&self) -> usize;
    fn outcomes(&self) -> usize;
    /// `ancilla` is the dimension of the untouched factor `D` of `input`.
    fn probe(&self, input: &Operator, ancilla: usize, x: usize) -> Result<Vec<Outcome>>;
}

/// A black box simulated from an extension and Alice's measurements.
#[derive(Clone, Debug)]
pub struct SimulatedBox {
    extension: ChannelExtension,
    measurements: MeasurementAssemblage,
}

impl SimulatedBox {
    pub fn new(extension: ChannelExtension, measurements: MeasurementAssemblage) -> Result<Self> {
        if measurements.dim() != extension.d_a() {
            return Err(Error::dims("measurements must act on Alice's output"));
        }
        Ok(SimulatedBox { extension, measurements })
    }
}

impl BlackBox for SimulatedBox {
    fn input_dim(&self) -> usize {
        self.extension.d_c()
    }

    fn output_dim(&self) -> usize {
        self.extension.d_b()
    }

    fn settings(&self) -> usize {
        self.measurements.settings()
    }

    fn outcomes(&self) -> usize {
        self.measurements.outcomes()
    }

    fn probe(&self, input: &Operator, ancilla: usize, x: usize) -> Result<Vec<Outcome>> {
        if x >= self.settings() {
            return Err(Error::dims(format!("setting {x} out of range")));
        }
        let out = self.extension.channel().apply(input, ancilla)?;
        let rest = self.extension.d_b() * ancilla;
        Ok(self.measurements.povms()[x]
            .iter()
            .map(|m| {
                let unnorm = crate::steering::contract_first(&out, self.extension.d_a(), rest, m);
                let p = unnorm.trace().re;
                if p > ZERO_PROBABILITY {
                    (p, unnorm.scale(1.0 / p))
                } else {
                    (0.0, Operator::identity(rest).scale(1.0 / rest as f64))
                }
            })
            .collect())
    }
}

/// Input states for product-mode tomography.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSet {
    states: Vec<Operator>,
}

impl ProbeSet {
    /// Every state must be a density operator of the same dimension.
    pub fn new(states: Vec<Operator>) -> Result<Self> {
        let d = states.first().ok_or_else(|| Error::invariant("at least one probe", "empty"))?.rows();
        for s in &states {
            if !s.is_square() || s.rows() != d {
                return Err(Error::dims("probes must share one square dimension"));
            }
            crate::linalg::eig_hermitian(s)?;
            if crate::linalg::min_eigenvalue(s) < -tol::PSD || (s.trace().re - 1.0).abs() > tol::TP {
                return Err(Error::invariant("probe is a density operator", "negative eigenvalue or trace ≠ 1"));
            }
        }
        Ok(ProbeSet { states })
    }

    /// `{|j⟩} ∪ {(|j⟩+|k⟩)/√2} ∪ {(|j⟩+i|k⟩)/√2}`; for qubits `|0⟩,|1⟩,|+⟩,|+i⟩`.
    pub fn standard(d: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut kets: Vec<Operator> = (0..d).map(|j| Operator::ket(d, j)).collect();
        for j in 0..d {
            for k in j + 1..d {
                for phase in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    kets.push(Operator::from_fn(d, 1, |r, _| {
                        if r == j {
                            C64::new(s, 0.0)
                        } else if r == k {
                            phase * s
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    }));
                }
            }
        }
        ProbeSet { states: kets.iter().map(Operator::outer).collect() }
    }

    /// Computational basis states only; these never reveal coherences.
    pub fn orthogonal(d: usize) -> Self {
        ProbeSet { states: (0..d).map(|j| Operator::basis_projector(d, j)).collect() }
    }

    pub fn states(&self) -> &[Operator] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states[0].rows()
    }

    /// Dimension of the operator span of the probes.
    pub fn rank(&self) -> usize {
        let d = self.dim();
        let vecs = Operator::from_fn(self.states.len(), d * d, |r, c| self.states[r].data()[c]);
        rank(&vecs, RANK_THRESHOLD)
    }
}

fn check_outcomes(outcomes: &[Outcome], expected: usize) -> Result<()> {
    if outcomes.len() != expected {
        return Err(Error::LengthMismatch { expected, got: outcomes.len() });
    }
    let total: f64 = outcomes.iter().map(|o| o.0).sum();
    if (total - 1.0).abs() > tol::PROBABILITY || outcomes.iter().any(|o| o.0 < -tol::PROBABILITY) {
        return Err(Error::invariant("Σ_a p(a|x) = 1", format!("total {total:.12}")));
    }
    Ok(())
}

fn check_shape(bb: &dyn BlackBox, x_count: usize, a_count: usize) -> Result<()> {
    if x_count != bb.settings() || a_count != bb.outcomes() {
        return Err(Error::dims(format!(
            "box has {} settings and {} outcomes, asked for {x_count} and {a_count}",
            bb.settings(),
            bb.outcomes()
        )));
    }
    Ok(())
}

/// Feed `ψ₊` on `C ⊗ C′`; each member's Choi operator is `p(a|x)` times the
/// conditional output, reordered from `B ⊗ C′` to `C′ ⊗ B`.
pub fn reconstruct_ancilla(bb: &dyn BlackBox, x_count: usize, a_count: usize) -> Result<ChannelAssemblage> {
    check_shape(bb, x_count, a_count)?;
    let (d_c, d_b) = (bb.input_dim(), bb.output_dim());
    let psi = max_entangled(d_c);
    let dims = DimSpec::new(vec![d_b, d_c])?;
    let members = (0..x_count)
        .map(|x| {
            let outcomes = bb.probe(&psi, d_c, x)?;
            check_outcomes(&outcomes, a_count)?;
            outcomes
                .into_iter()
                .map(|(p, rho)| {
                    let (j, _) = permute_subsystems(&rho.scale(p), &dims, &[1, 0])?;
                    Subchannel::from_choi(j.hermitian_part(), d_c, d_b)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ChannelAssemblage::new(members)
}

/// Least-squares inversion of `Λ_{a|x}(ρ_k) = p_k(a|x) ρ_{B|a,x,k}` over the
/// probes. With `Λ(ρ)[o,o′] = d Σ_{ij} ρ[i,j] J[(i,o),(j,o′)]`, every output
/// entry `(o,o′)` is a separate linear system in the `d²` unknowns
/// `J[(·,o),(·,o′)]` sharing one design matrix, solved via the normal
/// equations with column-pivoted QR.
pub fn reconstruct_products(
    bb: &dyn BlackBox,
    probes: &ProbeSet,
    x_count: usize,
    a_count: usize,
) -> Result<ChannelAssemblage> {
    reconstruct_products_with(bb, probes, x_count, a_count, Execution::Sequential)
}

pub fn reconstruct_products_with(
    bb: &dyn BlackBox,
    probes: &ProbeSet,
    x_count: usize,
    a_count: usize,
    exec: Execution,
) -> Result<ChannelAssemblage> {
    check_shape(bb, x_count, a_count)?;
    let (d, d_b) = (bb.input_dim(), bb.output_dim());
    if probes.dim() != d {
        return Err(Error::dims("probe dimension differs from the box input"));
    }
    let needed = d * d;
    let r = probes.rank();
    if r < needed {
        return Err(Error::RankDeficient { rank: r, needed });
    }
    let states = probes.states();
    let design = DMatrix::from_fn(states.len(), needed, |k, ij| states[k].data()[ij] * d as f64);
    let normal = design.adjoint() * &design;
    let qr = normal.col_piv_qr();
    let rdiag = qr.r().diagonal();
    let top = rdiag.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if rdiag.iter().any(|z| z.norm() <= RANK_THRESHOLD * top) {
        let rank = rdiag.iter().filter(|z| z.norm() > RANK_THRESHOLD * top).count();
        return Err(Error::RankDeficient { rank, needed });
    }

    // Outputs per probe: [k][x][a]
    let outputs = par::map(exec, states, |s| {
        (0..x_count)
            .map(|x| {
                let o = bb.probe(s, 1, x)?;
                check_outcomes(&o, a_count)?;
                Ok(o.into_iter().map(|(p, rho)| rho.scale(p)).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let rhs_cols = d_b * d_b;
    let members = (0..x_count)
        .map(|x| {
            (0..a_count)
                .map(|a| {
                    let rhs = DMatrix::from_fn(states.len(), rhs_cols, |k, oo| {
                        to_nalgebra(&outputs[k][x][a])[(oo / d_b, oo % d_b)]
                    });
                    let sol = qr
                        .solve(&(design.adjoint() * rhs))
                        .ok_or(Error::RankDeficient { rank: r, needed })?;
                    let j = Operator::from_fn(d * d_b, d * d_b, |row, col| {
                        let (i, o) = (row / d_b, row % d_b);
                        let (jj, o2) = (col / d_b, col % d_b);
                        sol[(i * d + jj, o * d_b + o2)]
                    });
                    Subchannel::from_choi(j.hermitian_part(), d, d_b)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ChannelAssemblage::new(members)
}

/// States left on `C` when the ancilla of `ψ₊` is projected onto the
/// transpose of each standard probe. Feeding them one by one repeats the
/// ancilla-mode experiment conditioned on Bob's ancilla outcome.
pub fn steered_inputs(d: usize) -> ProbeSet {
    let base = ProbeSet::standard(d);
    let psi = max_entangled(d);
    let states = base
        .states()
        .iter()
        .map(|p| {
            let proj = Operator::identity(d).kron(&p.transpose());
            let pr = proj.matmul(&psi).matmul(&proj);
            let reduced = crate::linalg::partial_trace(&pr, &DimSpec::new(vec![d, d]).expect("d ≥ 1"), &[0])
                .expect("consistent dimensions");
            let t = reduced.trace().re;
            reduced.scale(1.0 / t)
        })
        .collect();
    ProbeSet { states }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{
        identity_with_constant, pointer_extension, random_extension, random_instrument, random_povm, seeded_rng, Channel,
        Instrument,
    };
    use crate::steering::{choi_state_assemblage, induced_channel_assemblage, test_unsteerable};

    fn random_ma(d: usize, seed: u64) -> MeasurementAssemblage {
        let mut rng = seeded_rng(seed);
        MeasurementAssemblage::new((0..2).map(|_| random_povm(d, 2, &mut rng).unwrap()).collect()).unwrap()
    }

    #[test]
    fn identity_box_gives_maximally_entangled_member() {
        let e = Instrument::trivial(&Channel::identity(2));
        let ext = pointer_extension(&e);
        let bb = SimulatedBox::new(ext, MeasurementAssemblage::trivial(1, 1)).unwrap();
        let ca = reconstruct_ancilla(&bb, 1, 1).unwrap();
        assert!(ca.member(0, 0).choi().distance(&max_entangled(2)) < 1e-12);
    }

    #[test]
    fn pointer_box_recovers_instrument() {
        let inst = random_instrument(2, 2, 3, &mut seeded_rng(1)).unwrap();
        let bb = SimulatedBox::new(pointer_extension(&inst), MeasurementAssemblage::computational(3)).unwrap();
        let ca = reconstruct_ancilla(&bb, 1, 3).unwrap();
        for (a, m) in inst.members().iter().enumerate() {
            assert!(ca.member(a, 0).choi().distance(m.choi()) < 1e-9);
        }
    }

    #[test]
    fn fixed_output_box_steers_through_ancilla() {
        let ext = identity_with_constant(2, &Operator::basis_projector(2, 0)).unwrap();
        let bb = SimulatedBox::new(ext, MeasurementAssemblage::pauli_xz()).unwrap();
        let ca = reconstruct_ancilla(&bb, 2, 2).unwrap();
        assert!(test_unsteerable(&choi_state_assemblage(&ca)).unwrap().steerable);
    }

    #[test]
    fn both_modes_match_direct_construction() {
        for seed in 0..5 {
            let ext = random_extension(2, 2, 2, seed).unwrap();
            let ma = random_ma(2, seed + 50);
            let direct = induced_channel_assemblage(&ext, &ma).unwrap();
            let bb = SimulatedBox::new(ext, ma).unwrap();
            let anc = reconstruct_ancilla(&bb, 2, 2).unwrap();
            let prod = reconstruct_products(&bb, &ProbeSet::standard(2), 2, 2).unwrap();
            assert!(anc.distance(&direct) < 1e-9);
            assert!(prod.distance(&direct) < 1e-8);
        }
    }

    #[test]
    fn qutrit_probes_span() {
        assert_eq!(ProbeSet::standard(3).states().len(), 9);
        assert_eq!(ProbeSet::standard(3).rank(), 9);
        let ext = random_extension(3, 2, 2, 7).unwrap();
        let ma = random_ma(2, 8);
        let direct = induced_channel_assemblage(&ext, &ma).unwrap();
        let bb = SimulatedBox::new(ext, ma).unwrap();
        let prod = reconstruct_products_with(&bb, &ProbeSet::standard(3), 2, 2, Execution::Parallel).unwrap();
        assert!(prod.distance(&direct) < 1e-8);
    }

    #[test]
    fn orthogonal_probes_are_rank_deficient() {
        let ext = identity_with_constant(2, &Operator::basis_projector(2, 0)).unwrap();
        let bb = SimulatedBox::new(ext, MeasurementAssemblage::pauli_xz()).unwrap();
        match reconstruct_products(&bb, &ProbeSet::orthogonal(2), 2, 2) {
            Err(Error::RankDeficient { rank, needed }) => assert_eq!((rank, needed), (2, 4)),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn steered_inputs_reproduce_ancilla_mode() {
        let ext = random_extension(2, 2, 2, 11).unwrap();
        let bb = SimulatedBox::new(ext, MeasurementAssemblage::pauli_xz()).unwrap();
        let anc = reconstruct_ancilla(&bb, 2, 2).unwrap();
        let prod = reconstruct_products(&bb, &steered_inputs(2), 2, 2).unwrap();
        assert!(anc.distance(&prod) < 1e-8);
        // Projecting the ancilla of ψ₊ onto Pᵀ leaves P itself on C.
        for (a, b) in steered_inputs(3).states().iter().zip(ProbeSet::standard(3).states()) {
            assert!(a.distance(b) < 1e-12);
        }
    }

    #[test]
    fn box_rejects_bad_shapes() {
        let ext = random_extension(2, 2, 2, 3).unwrap();
        assert!(SimulatedBox::new(ext.clone(), MeasurementAssemblage::computational(3)).is_err());
        let bb = SimulatedBox::new(ext, MeasurementAssemblage::pauli_xz()).unwrap();
        assert!(reconstruct_ancilla(&bb, 3, 2).is_err());
        assert!(bb.probe(&Operator::basis_projector(2, 0), 1, 5).is_err());
    }
}
