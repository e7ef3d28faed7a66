use serde::{Deserialize, Serialize};

use crate::channels::{Channel, ChannelExtension, Subchannel};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, pauli, DimSpec, Operator, C64, ZERO};
use crate::tol;

/// POVMs `{M_{a|x}}_a` on Alice's system, one per setting `x`, all with the
/// same number of outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasurementDoc", into = "MeasurementDoc")]
pub struct MeasurementAssemblage {
    povms: Vec<Vec<Operator>>,
}

#[derive(Serialize, Deserialize)]
struct MeasurementDoc {
    povms: Vec<Vec<Operator>>,
}

impl TryFrom<MeasurementDoc> for MeasurementAssemblage {
    type Error = Error;
    fn try_from(doc: MeasurementDoc) -> Result<Self> {
        MeasurementAssemblage::new(doc.povms)
    }
}

impl From<MeasurementAssemblage> for MeasurementDoc {
    fn from(m: MeasurementAssemblage) -> Self {
        MeasurementDoc { povms: m.povms }
    }
}

impl MeasurementAssemblage {
    pub fn new(povms: Vec<Vec<Operator>>) -> Result<Self> {
        let first = povms.first().and_then(|p| p.first()).ok_or_else(|| Error::invariant("at least one effect", "empty"))?;
        let (d, k) = (first.rows(), povms[0].len());
        for (x, povm) in povms.iter().enumerate() {
            if povm.len() != k {
                return Err(Error::LengthMismatch { expected: k, got: povm.len() });
            }
            let mut total = Operator::zeros(d, d);
            for m in povm {
                if !m.is_square() || m.rows() != d {
                    return Err(Error::dims("effects must share one square dimension"));
                }
                let defect = m.hermiticity_defect();
                if defect > tol::HERMITIAN {
                    return Err(Error::NotHermitian { deviation: defect });
                }
                let lmin = min_eigenvalue(m);
                if lmin < -tol::PSD {
                    return Err(Error::invariant("M_{a|x} ⪰ 0", format!("setting {x}: min eigenvalue {lmin:.3e}")));
                }
                total = &total + m;
            }
            let dev = (&total - &Operator::identity(d)).max_abs();
            if dev > tol::TP {
                return Err(Error::invariant("Σ_a M_{a|x} = I", format!("setting {x}: deviation {dev:.3e}")));
            }
        }
        let povms = povms.into_iter().map(|p| p.into_iter().map(|m| m.hermitian_part()).collect()).collect();
        Ok(MeasurementAssemblage { povms })
    }

    /// Rank-one projective measurements onto the columns of each unitary.
    pub fn from_bases(bases: &[Operator]) -> Result<Self> {
        let povms = bases
            .iter()
            .map(|u| {
                (0..u.cols())
                    .map(|c| Operator::outer(&Operator::from_fn(u.rows(), 1, |r, _| u[(r, c)])))
                    .collect()
            })
            .collect();
        MeasurementAssemblage::new(povms)
    }

    /// Qubit Pauli X (setting 0) and Z (setting 1) measurements; outcome `a`
    /// is the eigenvalue `(−1)^a`.
    pub fn pauli_xz() -> Self {
        let effects = |p: Operator| {
            let id = Operator::identity(2);
            vec![(&id + &p).scale(0.5), (&id - &p).scale(0.5)]
        };
        MeasurementAssemblage { povms: vec![effects(pauli::x()), effects(pauli::z())] }
    }

    /// Computational-basis measurement as a single setting.
    pub fn computational(d: usize) -> Self {
        MeasurementAssemblage { povms: vec![(0..d).map(|i| Operator::basis_projector(d, i)).collect()] }
    }

    /// `settings` copies of the one-outcome measurement `{I}`.
    pub fn trivial(d: usize, settings: usize) -> Self {
        MeasurementAssemblage { povms: vec![vec![Operator::identity(d)]; settings] }
    }

    pub fn povms(&self) -> &[Vec<Operator>] {
        &self.povms
    }

    pub fn effect(&self, a: usize, x: usize) -> &Operator {
        &self.povms[x][a]
    }

    pub fn dim(&self) -> usize {
        self.povms[0][0].rows()
    }

    pub fn settings(&self) -> usize {
        self.povms.len()
    }

    pub fn outcomes(&self) -> usize {
        self.povms[0].len()
    }

    pub fn map_effects(&self, f: impl Fn(&Operator) -> Result<Operator>) -> Result<Self> {
        let povms = self.povms.iter().map(|p| p.iter().map(&f).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
        MeasurementAssemblage::new(povms)
    }
}

/// Subnormalized states `ρ_{a|x}` on Bob's space, stored `[x][a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateDoc", into = "StateDoc")]
pub struct StateAssemblage {
    members: Vec<Vec<Operator>>,
}

#[derive(Serialize, Deserialize)]
struct StateDoc {
    members: Vec<Vec<Operator>>,
}

impl TryFrom<StateDoc> for StateAssemblage {
    type Error = Error;
    fn try_from(doc: StateDoc) -> Result<Self> {
        StateAssemblage::new(doc.members)
    }
}

impl From<StateAssemblage> for StateDoc {
    fn from(s: StateAssemblage) -> Self {
        StateDoc { members: s.members }
    }
}

impl StateAssemblage {
    /// Validates positivity, unit total trace and consistency. Consistency
    /// defects up to `tol::CONSISTENCY` are repaired by moving every
    /// `Σ_a ρ_{a|x}` to the average over `x`; larger defects are rejected.
    pub fn new(members: Vec<Vec<Operator>>) -> Result<Self> {
        let first = members.first().and_then(|m| m.first()).ok_or_else(|| Error::invariant("at least one member", "empty"))?;
        let (n, k) = (first.rows(), members[0].len());
        for row in &members {
            if row.len() != k {
                return Err(Error::LengthMismatch { expected: k, got: row.len() });
            }
            for m in row {
                if !m.is_square() || m.rows() != n {
                    return Err(Error::dims("assemblage members must share one square dimension"));
                }
                let defect = m.hermiticity_defect();
                if defect > tol::HERMITIAN {
                    return Err(Error::NotHermitian { deviation: defect });
                }
                let lmin = min_eigenvalue(m);
                if lmin < -tol::PSD {
                    return Err(Error::invariant("ρ_{a|x} ⪰ 0", format!("min eigenvalue {lmin:.3e}")));
                }
            }
        }
        let mut members: Vec<Vec<Operator>> =
            members.into_iter().map(|r| r.into_iter().map(|m| m.hermitian_part()).collect()).collect();
        let sums: Vec<Operator> = members.iter().map(|r| r.iter().cloned().sum()).collect();
        let mean = sums.iter().cloned().sum::<Operator>().scale(1.0 / sums.len() as f64);
        let dev = sums.iter().map(|s| s.distance(&mean)).fold(0.0, f64::max);
        if dev > tol::CONSISTENCY {
            return Err(Error::invariant("Σ_a ρ_{a|x} independent of x", format!("deviation {dev:.3e}")));
        }
        if dev > 1e-13 {
            log::warn!("repairing assemblage consistency defect {dev:.3e}");
            for (row, s) in members.iter_mut().zip(&sums) {
                let shift = (&mean - s).scale(1.0 / k as f64);
                for m in row.iter_mut() {
                    *m = &*m + &shift;
                }
            }
        }
        let tr = mean.trace().re;
        if (tr - 1.0).abs() > tol::CONSISTENCY {
            return Err(Error::invariant("Tr Σ_a ρ_{a|x} = 1", format!("trace {tr:.12}")));
        }
        Ok(StateAssemblage { members })
    }

    /// Members obtained by measuring the first factor of a bipartite state
    /// `ρ` on `A ⊗ R`: `ρ_{a|x} = Tr_A[(M_{a|x} ⊗ I) ρ]`.
    pub fn from_bipartite(rho: &Operator, d_a: usize, ma: &MeasurementAssemblage) -> Result<Self> {
        if ma.dim() != d_a || rho.rows() % d_a != 0 {
            return Err(Error::dims("measurement dimension does not match the measured factor"));
        }
        let r = rho.rows() / d_a;
        let members = ma
            .povms()
            .iter()
            .map(|p| p.iter().map(|m| contract_first(rho, d_a, r, m)).collect())
            .collect();
        StateAssemblage::new(members)
    }

    pub fn members(&self) -> &[Vec<Operator>] {
        &self.members
    }

    pub fn member(&self, a: usize, x: usize) -> &Operator {
        &self.members[x][a]
    }

    pub fn dim(&self) -> usize {
        self.members[0][0].rows()
    }

    pub fn settings(&self) -> usize {
        self.members.len()
    }

    pub fn outcomes(&self) -> usize {
        self.members[0].len()
    }

    /// `ρ = Σ_a ρ_{a|0}`.
    pub fn reduced(&self) -> Operator {
        self.members[0].iter().cloned().sum()
    }

    /// `η ρ_{a|x} + (1 − η) Tr(ρ_{a|x}) I/n`.
    pub fn with_white_noise(&self, eta: f64) -> Result<Self> {
        let n = self.dim();
        let id = Operator::identity(n);
        let members = self
            .members
            .iter()
            .map(|r| r.iter().map(|m| &m.scale(eta) + &id.scale((1.0 - eta) * m.trace().re / n as f64)).collect())
            .collect();
        StateAssemblage::new(members)
    }

    /// `u ρ_{a|x} u†` for every member.
    pub fn conjugate(&self, u: &Operator) -> Result<Self> {
        StateAssemblage::new(self.members.iter().map(|r| r.iter().map(|m| u.sandwich(m)).collect()).collect())
    }
}

/// `Tr_A[(M ⊗ I_R) ρ]` for `ρ` on `A ⊗ R`.
pub(crate) fn contract_first(rho: &Operator, d_a: usize, r: usize, m: &Operator) -> Operator {
    let mut out = Operator::zeros(r, r);
    for a in 0..d_a {
        for a2 in 0..d_a {
            let w = m[(a, a2)];
            if w == ZERO {
                continue;
            }
            // Σ_{a,a′} M[a,a′] ρ[(a′,i),(a,j)]
            for i in 0..r {
                for j in 0..r {
                    out[(i, j)] += w * rho[(a2 * r + i, a * r + j)];
                }
            }
        }
    }
    out
}

/// `Tr_A[(I_{C′} ⊗ M ⊗ I_B) J]` for `J` ordered `(C′, A, B)`.
pub(crate) fn contract_alice(j: &Operator, dims: &DimSpec, m: &Operator) -> Operator {
    let (d_c, d_a, d_b) = (dims.dims()[0], dims.dims()[1], dims.dims()[2]);
    let n = d_c * d_b;
    let idx = |c: usize, a: usize, b: usize| (c * d_a + a) * d_b + b;
    Operator::from_fn(n, n, |r, col| {
        let (c1, b1, c2, b2) = (r / d_b, r % d_b, col / d_b, col % d_b);
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..d_a {
            for a2 in 0..d_a {
                let w = m[(a, a2)];
                if w != ZERO {
                    acc += w * j[(idx(c1, a2, b1), idx(c2, a, b2))];
                }
            }
        }
        acc
    })
}

/// Instruments `{Λ_{a|x}}_a` for a common channel, stored `[x][a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelAssemblageDoc", into = "ChannelAssemblageDoc")]
pub struct ChannelAssemblage {
    members: Vec<Vec<Subchannel>>,
}

#[derive(Serialize, Deserialize)]
struct ChannelAssemblageDoc {
    members: Vec<Vec<Subchannel>>,
}

impl TryFrom<ChannelAssemblageDoc> for ChannelAssemblage {
    type Error = Error;
    fn try_from(doc: ChannelAssemblageDoc) -> Result<Self> {
        ChannelAssemblage::new(doc.members)
    }
}

impl From<ChannelAssemblage> for ChannelAssemblageDoc {
    fn from(c: ChannelAssemblage) -> Self {
        ChannelAssemblageDoc { members: c.members }
    }
}

impl ChannelAssemblage {
    pub fn new(members: Vec<Vec<Subchannel>>) -> Result<Self> {
        let first = members.first().and_then(|m| m.first()).ok_or_else(|| Error::invariant("at least one member", "empty"))?;
        let (d_in, d_out, k) = (first.d_in(), first.d_out(), members[0].len());
        for row in &members {
            if row.len() != k {
                return Err(Error::LengthMismatch { expected: k, got: row.len() });
            }
            if row.iter().any(|s| s.d_in() != d_in || s.d_out() != d_out) {
                return Err(Error::dims("subchannels must share dimensions"));
            }
        }
        let ca = ChannelAssemblage { members };
        let dev = ca.consistency_defect();
        if dev > tol::CONSISTENCY {
            return Err(Error::invariant("Σ_a Λ_{a|x} independent of x", format!("deviation {dev:.3e}")));
        }
        Channel::from_choi(ca.total_choi(0), d_in, DimSpec::new(vec![d_out])?)
            .map_err(|e| Error::invariant("Σ_a Λ_{a|x} is a channel", e.to_string()))?;
        Ok(ca)
    }

    fn total_choi(&self, x: usize) -> Operator {
        self.members[x].iter().map(|s| s.choi().clone()).sum()
    }

    /// `max_x ‖Σ_a J(Λ_{a|x}) − Σ_a J(Λ_{a|0})‖_F`.
    pub fn consistency_defect(&self) -> f64 {
        let base = self.total_choi(0);
        (1..self.members.len()).map(|x| self.total_choi(x).distance(&base)).fold(0.0, f64::max)
    }

    pub fn members(&self) -> &[Vec<Subchannel>] {
        &self.members
    }

    pub fn member(&self, a: usize, x: usize) -> &Subchannel {
        &self.members[x][a]
    }

    pub fn settings(&self) -> usize {
        self.members.len()
    }

    pub fn outcomes(&self) -> usize {
        self.members[0].len()
    }

    pub fn d_in(&self) -> usize {
        self.members[0][0].d_in()
    }

    pub fn d_out(&self) -> usize {
        self.members[0][0].d_out()
    }

    /// The common channel `Σ_a Λ_{a|x}`.
    pub fn total(&self) -> Channel {
        Channel::from_choi(self.total_choi(0), self.d_in(), DimSpec::new(vec![self.d_out()]).expect("positive"))
            .expect("validated at construction")
    }

    /// Largest member-wise Frobenius distance between Choi operators.
    pub fn distance(&self, other: &ChannelAssemblage) -> f64 {
        self.members
            .iter()
            .flatten()
            .zip(other.members.iter().flatten())
            .map(|(a, b)| a.choi().distance(b.choi()))
            .fold(0.0, f64::max)
    }
}

/// `Λ_{a|x}[X] = Tr_A(M_{a|x} Λ[X])`.
pub fn induced_channel_assemblage(e: &ChannelExtension, ma: &MeasurementAssemblage) -> Result<ChannelAssemblage> {
    if ma.dim() != e.d_a() {
        return Err(Error::dims(format!("measurements act on dimension {}, Alice holds {}", ma.dim(), e.d_a())));
    }
    let dims = e.choi_dims();
    let members = ma
        .povms()
        .iter()
        .map(|p| {
            p.iter()
                .map(|m| Subchannel::from_choi(contract_alice(e.choi(), &dims, m).hermitian_part(), e.d_c(), e.d_b()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ChannelAssemblage::new(members)
}

/// `ρ_{a|x} = J(Λ_{a|x})` on `C′ ⊗ B`.
pub fn choi_state_assemblage(ca: &ChannelAssemblage) -> StateAssemblage {
    let members = ca.members.iter().map(|r| r.iter().map(|s| s.choi().clone()).collect()).collect();
    StateAssemblage::new(members).expect("channel assemblage invariants imply state assemblage invariants")
}
