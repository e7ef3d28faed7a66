use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, max_entangled, min_eigenvalue, partial_trace, DimSpec, Operator, C64, ZERO};
use crate::tol;

/// Hermitize and check `choi ⪰ 0` and the trace condition on `Tr_out`.
fn validate_choi(choi: &Operator, d_in: usize, d_out: usize, trace_preserving: bool) -> Result<Operator> {
    if !choi.is_square() || choi.rows() != d_in * d_out || d_in == 0 || d_out == 0 {
        return Err(Error::dims(format!(
            "Choi operator is {}×{}, expected side {}·{}",
            choi.rows(),
            choi.cols(),
            d_in,
            d_out
        )));
    }
    let defect = choi.hermiticity_defect();
    if defect > tol::HERMITIAN {
        return Err(Error::NotHermitian { deviation: defect });
    }
    let choi = choi.hermitian_part();
    let lmin = min_eigenvalue(&choi);
    if lmin < -tol::PSD {
        return Err(Error::invariant("choi ⪰ 0", format!("min eigenvalue {lmin:.3e}")));
    }
    let reduced = partial_trace(&choi, &DimSpec::new(vec![d_in, d_out])?, &[0])?;
    let target = Operator::identity(d_in).scale(1.0 / d_in as f64);
    if trace_preserving {
        let dev = (&reduced - &target).max_abs();
        if dev > tol::TP {
            return Err(Error::invariant("Tr_out J = I/d_in", format!("deviation {dev:.3e}")));
        }
    } else {
        let lmin = min_eigenvalue(&(&target - &reduced));
        if lmin < -tol::TP {
            return Err(Error::invariant("Tr_out J ⪯ I/d_in", format!("excess eigenvalue {:.3e}", -lmin)));
        }
    }
    Ok(choi)
}

/// Choi-state action: `out[(o,δ),(o′,δ′)] = d Σ_ij ρ[(i,δ),(j,δ′)] J[(i,o),(j,o′)]`.
pub(crate) fn apply_linear(choi: &Operator, d_in: usize, d_out: usize, rho: &Operator, ancilla: usize) -> Operator {
    let d = d_in as f64;
    let n = d_out * ancilla;
    let mut out = Operator::zeros(n, n);
    for i in 0..d_in {
        for j in 0..d_in {
            for da in 0..ancilla {
                for db in 0..ancilla {
                    let r = rho[(i * ancilla + da, j * ancilla + db)];
                    if r == ZERO {
                        continue;
                    }
                    let r = r * d;
                    for o in 0..d_out {
                        for p in 0..d_out {
                            out[(o * ancilla + da, p * ancilla + db)] += r * choi[(i * d_out + o, j * d_out + p)];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Heisenberg picture: `Tr(M Λ(ρ)) = Tr(Λ†(M) ρ)`.
pub(crate) fn dual_linear(choi: &Operator, d_in: usize, d_out: usize, m: &Operator) -> Operator {
    let d = d_in as f64;
    Operator::from_fn(d_in, d_in, |j, i| {
        let mut acc = ZERO;
        for o in 0..d_out {
            for p in 0..d_out {
                acc += choi[(i * d_out + o, j * d_out + p)] * m[(p, o)];
            }
        }
        acc * d
    })
}

fn choi_of_operators(ops: &[Operator]) -> Operator {
    let (d_out, d_in) = (ops[0].rows(), ops[0].cols());
    let n = d_in * d_out;
    let s = 1.0 / d_in as f64;
    let mut j = Operator::zeros(n, n);
    for k in ops {
        // J = Σ_k v_k v_k† with v_k[(i,o)] = K_k[o,i]
        for a in 0..n {
            let va = k[(a % d_out, a / d_out)];
            if va == ZERO {
                continue;
            }
            for b in 0..n {
                j[(a, b)] += va * k[(b % d_out, b / d_out)].conj() * s;
            }
        }
    }
    j
}

/// Completely positive trace-preserving map stored by its unit-trace Choi
/// operator on `C′ ⊗ out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelDoc", into = "ChannelDoc")]
pub struct Channel {
    choi: Operator,
    d_in: usize,
    d_out: DimSpec,
}

#[derive(Serialize, Deserialize)]
struct ChannelDoc {
    choi: Operator,
    d_in: usize,
    d_out: DimSpec,
}

impl TryFrom<ChannelDoc> for Channel {
    type Error = Error;
    fn try_from(doc: ChannelDoc) -> Result<Self> {
        Channel::from_choi(doc.choi, doc.d_in, doc.d_out)
    }
}

impl From<Channel> for ChannelDoc {
    fn from(c: Channel) -> Self {
        ChannelDoc { choi: c.choi, d_in: c.d_in, d_out: c.d_out }
    }
}

impl Channel {
    pub fn from_choi(choi: Operator, d_in: usize, d_out: DimSpec) -> Result<Self> {
        let choi = validate_choi(&choi, d_in, d_out.total(), true)?;
        Ok(Channel { choi, d_in, d_out })
    }

    pub(crate) fn from_choi_unchecked(choi: Operator, d_in: usize, d_out: DimSpec) -> Self {
        Channel { choi, d_in, d_out }
    }

    pub fn identity(d: usize) -> Self {
        Channel { choi: max_entangled(d), d_in: d, d_out: DimSpec::new(vec![d]).expect("positive dimension") }
    }

    /// `ρ ↦ U ρ U†`.
    pub fn unitary(u: &Operator) -> Result<Self> {
        choi_from_kraus(&KrausSet::new(vec![u.clone()])?)
    }

    /// `ρ ↦ Tr(ρ) σ`.
    pub fn fixed_output(d_in: usize, sigma: &Operator) -> Result<Self> {
        let choi = Operator::identity(d_in).scale(1.0 / d_in as f64).kron(sigma);
        Channel::from_choi(choi, d_in, DimSpec::new(vec![sigma.rows()])?)
    }

    /// `ρ ↦ (1 − p) ρ + p Tr(ρ) I/d`.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        let n = (d * d) as f64;
        let choi = &max_entangled(d).scale(1.0 - p) + &Operator::identity(d * d).scale(p / n);
        Channel::from_choi(choi, d, DimSpec::new(vec![d])?)
    }

    /// Qubit dephasing `ρ ↦ (1 − p) ρ + p ZρZ`.
    pub fn dephasing(p: f64) -> Result<Self> {
        choi_from_kraus(&KrausSet::dephasing(p)?)
    }

    /// Qubit amplitude damping with decay probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        choi_from_kraus(&KrausSet::amplitude_damping(gamma)?)
    }

    pub fn choi(&self) -> &Operator {
        &self.choi
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> &DimSpec {
        &self.d_out
    }

    /// Total output dimension.
    pub fn out_dim(&self) -> usize {
        self.d_out.total()
    }

    /// Apply to a density operator on `C ⊗ D` with `D` of dimension `ancilla`.
    pub fn apply(&self, rho: &Operator, ancilla: usize) -> Result<Operator> {
        apply(self, rho, ancilla)
    }

    /// Heisenberg-picture dual map on an operator on the output space.
    pub fn dual(&self, m: &Operator) -> Result<Operator> {
        let n = self.out_dim();
        if m.rows() != n || m.cols() != n {
            return Err(Error::dims(format!("dual map expects {n}×{n}, got {}×{}", m.rows(), m.cols())));
        }
        Ok(dual_linear(&self.choi, self.d_in, n, m))
    }

    pub fn kraus(&self) -> Result<KrausSet> {
        kraus_from_choi(self)
    }

    pub fn as_subchannel(&self) -> Subchannel {
        Subchannel { choi: self.choi.clone(), d_in: self.d_in, d_out: self.out_dim() }
    }
}

/// Completely positive trace-non-increasing map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SubchannelDoc", into = "SubchannelDoc")]
pub struct Subchannel {
    choi: Operator,
    d_in: usize,
    d_out: usize,
}

#[derive(Serialize, Deserialize)]
struct SubchannelDoc {
    choi: Operator,
    d_in: usize,
    d_out: usize,
}

impl TryFrom<SubchannelDoc> for Subchannel {
    type Error = Error;
    fn try_from(doc: SubchannelDoc) -> Result<Self> {
        Subchannel::from_choi(doc.choi, doc.d_in, doc.d_out)
    }
}

impl From<Subchannel> for SubchannelDoc {
    fn from(s: Subchannel) -> Self {
        SubchannelDoc { choi: s.choi, d_in: s.d_in, d_out: s.d_out }
    }
}

impl Subchannel {
    pub fn from_choi(choi: Operator, d_in: usize, d_out: usize) -> Result<Self> {
        let choi = validate_choi(&choi, d_in, d_out, false)?;
        Ok(Subchannel { choi, d_in, d_out })
    }

    /// `ρ ↦ Σ_k K_k ρ K_k†`.
    pub fn from_operators(ops: &[Operator]) -> Result<Self> {
        let k = KrausSet::new(ops.to_vec())?;
        Subchannel::from_choi(choi_of_operators(&k.operators), k.d_in(), k.d_out())
    }

    pub fn choi(&self) -> &Operator {
        &self.choi
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// Unnormalized output on `out ⊗ D` for an operator on `C ⊗ D`.
    pub fn apply(&self, rho: &Operator, ancilla: usize) -> Result<Operator> {
        let n = self.d_in * ancilla;
        if rho.rows() != n || rho.cols() != n {
            return Err(Error::dims(format!("input must be {n}×{n}, got {}×{}", rho.rows(), rho.cols())));
        }
        Ok(apply_linear(&self.choi, self.d_in, self.d_out, rho, ancilla))
    }

    /// `Λ†(M)`; with `M = I` this is the effect operator of the subchannel.
    pub fn dual(&self, m: &Operator) -> Result<Operator> {
        if m.rows() != self.d_out || m.cols() != self.d_out {
            return Err(Error::dims("dual map argument must live on the output space"));
        }
        Ok(dual_linear(&self.choi, self.d_in, self.d_out, m))
    }

    pub fn scale(&self, s: f64) -> Subchannel {
        Subchannel { choi: self.choi.scale(s), d_in: self.d_in, d_out: self.d_out }
    }
}

/// Subchannels summing to a channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstrumentDoc", into = "InstrumentDoc")]
pub struct Instrument {
    members: Vec<Subchannel>,
}

#[derive(Serialize, Deserialize)]
struct InstrumentDoc {
    members: Vec<Subchannel>,
}

impl TryFrom<InstrumentDoc> for Instrument {
    type Error = Error;
    fn try_from(doc: InstrumentDoc) -> Result<Self> {
        Instrument::new(doc.members)
    }
}

impl From<Instrument> for InstrumentDoc {
    fn from(i: Instrument) -> Self {
        InstrumentDoc { members: i.members }
    }
}

impl Instrument {
    pub fn new(members: Vec<Subchannel>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::invariant("instrument non-empty", "no members"))?;
        let (d_in, d_out) = (first.d_in, first.d_out);
        if members.iter().any(|m| m.d_in != d_in || m.d_out != d_out) {
            return Err(Error::dims("instrument members have different dimensions"));
        }
        let total: Operator = members.iter().map(|m| m.choi.clone()).sum();
        validate_choi(&total, d_in, d_out, true)
            .map_err(|e| Error::invariant("Σ members is a channel", e.to_string()))?;
        Ok(Instrument { members })
    }

    /// Members `ρ ↦ Σ_k K_k ρ K_k†`, one group of Kraus operators per member.
    pub fn from_kraus_groups(groups: &[Vec<Operator>]) -> Result<Self> {
        let members = groups.iter().map(|g| Subchannel::from_operators(g)).collect::<Result<Vec<_>>>()?;
        Instrument::new(members)
    }

    /// The single-member instrument `{Λ}`.
    pub fn trivial(c: &Channel) -> Self {
        Instrument { members: vec![c.as_subchannel()] }
    }

    pub fn members(&self) -> &[Subchannel] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn d_in(&self) -> usize {
        self.members[0].d_in
    }

    pub fn d_out(&self) -> usize {
        self.members[0].d_out
    }

    /// The channel `Σ_λ Λ_λ`.
    pub fn total(&self) -> Channel {
        let choi: Operator = self.members.iter().map(|m| m.choi.clone()).sum();
        Channel::from_choi_unchecked(choi, self.d_in(), DimSpec::new(vec![self.d_out()]).expect("positive"))
    }
}

/// Kraus operators `K_i : C → out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KrausDoc", into = "KrausDoc")]
pub struct KrausSet {
    operators: Vec<Operator>,
}

#[derive(Serialize, Deserialize)]
struct KrausDoc {
    operators: Vec<Operator>,
}

impl TryFrom<KrausDoc> for KrausSet {
    type Error = Error;
    fn try_from(doc: KrausDoc) -> Result<Self> {
        KrausSet::new(doc.operators)
    }
}

impl From<KrausSet> for KrausDoc {
    fn from(k: KrausSet) -> Self {
        KrausDoc { operators: k.operators }
    }
}

impl KrausSet {
    /// Accepts any trace-non-increasing set (`Σ K†K ⪯ I`).
    pub fn new(operators: Vec<Operator>) -> Result<Self> {
        let first = operators.first().ok_or_else(|| Error::invariant("Kraus set non-empty", "no operators"))?;
        let shape = (first.rows(), first.cols());
        if operators.iter().any(|k| (k.rows(), k.cols()) != shape) {
            return Err(Error::dims("Kraus operators have different shapes"));
        }
        let set = KrausSet { operators };
        let excess = -min_eigenvalue(&(&Operator::identity(shape.1) - &set.completeness()));
        if excess > tol::TP {
            return Err(Error::invariant("Σ K†K ⪯ I", format!("excess eigenvalue {excess:.3e}")));
        }
        Ok(set)
    }

    pub fn dephasing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invariant("0 ≤ p ≤ 1", format!("p = {p}")));
        }
        KrausSet::new(vec![Operator::identity(2).scale((1.0 - p).sqrt()), crate::linalg::pauli::z().scale(p.sqrt())])
    }

    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::invariant("0 ≤ γ ≤ 1", format!("γ = {gamma}")));
        }
        let k0 = Operator::from_real(2, 2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()])?;
        let k1 = Operator::from_real(2, 2, &[0.0, gamma.sqrt(), 0.0, 0.0])?;
        KrausSet::new(vec![k0, k1])
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn d_in(&self) -> usize {
        self.operators[0].cols()
    }

    pub fn d_out(&self) -> usize {
        self.operators[0].rows()
    }

    /// `Σ K_i† K_i`.
    pub fn completeness(&self) -> Operator {
        self.operators.iter().map(|k| k.adjoint().matmul(k)).sum()
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        (&self.completeness() - &Operator::identity(self.d_in())).max_abs() <= tol
    }

    fn require_tp(&self) -> Result<()> {
        let dev = (&self.completeness() - &Operator::identity(self.d_in())).max_abs();
        if dev > tol::TP {
            return Err(Error::invariant("Σ K†K = I", format!("deviation {dev:.3e}")));
        }
        Ok(())
    }
}

/// Isometry `V : C → A ⊗ B` with `V†V = I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StinespringDoc", into = "StinespringDoc")]
pub struct StinespringIsometry {
    v: Operator,
    d_a: usize,
    d_b: usize,
}

#[derive(Serialize, Deserialize)]
struct StinespringDoc {
    v: Operator,
    d_a: usize,
    d_b: usize,
}

impl TryFrom<StinespringDoc> for StinespringIsometry {
    type Error = Error;
    fn try_from(doc: StinespringDoc) -> Result<Self> {
        StinespringIsometry::new(doc.v, doc.d_a, doc.d_b)
    }
}

impl From<StinespringIsometry> for StinespringDoc {
    fn from(s: StinespringIsometry) -> Self {
        StinespringDoc { v: s.v, d_a: s.d_a, d_b: s.d_b }
    }
}

impl StinespringIsometry {
    pub fn new(v: Operator, d_a: usize, d_b: usize) -> Result<Self> {
        if v.rows() != d_a * d_b {
            return Err(Error::dims(format!("isometry has {} rows, expected {}·{}", v.rows(), d_a, d_b)));
        }
        let dev = (&v.adjoint().matmul(&v) - &Operator::identity(v.cols())).max_abs();
        if dev > tol::TP {
            return Err(Error::invariant("V†V = I", format!("deviation {dev:.3e}")));
        }
        Ok(StinespringIsometry { v, d_a, d_b })
    }

    pub fn v(&self) -> &Operator {
        &self.v
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn d_c(&self) -> usize {
        self.v.cols()
    }

    /// Extension `X ↦ V X V†` with output split `A ⊗ B`.
    pub fn extension(&self) -> ChannelExtension {
        let choi = choi_of_operators(std::slice::from_ref(&self.v));
        ChannelExtension::from_parts(choi, self.d_c(), self.d_a, self.d_b, ExtensionOrigin::Isometric)
    }
}

/// How an extension was produced. Constructors of the separable form
/// `Σ_λ Λ_λ ⊗ σ_λ` mark their output `Incoherent`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionOrigin {
    Incoherent,
    Isometric,
    #[default]
    Generic,
}

/// Channel `C → A ⊗ B` with Choi operator ordered `(C′, A, B)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExtensionDoc", into = "ExtensionDoc")]
pub struct ChannelExtension {
    channel: Channel,
    origin: ExtensionOrigin,
}

#[derive(Serialize, Deserialize)]
struct ExtensionDoc {
    choi: Operator,
    d_c: usize,
    d_a: usize,
    d_b: usize,
    #[serde(default)]
    origin: ExtensionOrigin,
}

impl TryFrom<ExtensionDoc> for ChannelExtension {
    type Error = Error;
    fn try_from(doc: ExtensionDoc) -> Result<Self> {
        let mut e = ChannelExtension::new(doc.choi, doc.d_c, doc.d_a, doc.d_b)?;
        e.origin = doc.origin;
        Ok(e)
    }
}

impl From<ChannelExtension> for ExtensionDoc {
    fn from(e: ChannelExtension) -> Self {
        let (d_c, d_a, d_b) = (e.d_c(), e.d_a(), e.d_b());
        ExtensionDoc { choi: e.channel.choi, d_c, d_a, d_b, origin: e.origin }
    }
}

impl ChannelExtension {
    pub fn new(choi: Operator, d_c: usize, d_a: usize, d_b: usize) -> Result<Self> {
        let channel = Channel::from_choi(choi, d_c, DimSpec::new(vec![d_a, d_b])?)?;
        Ok(ChannelExtension { channel, origin: ExtensionOrigin::Generic })
    }

    pub(crate) fn from_parts(choi: Operator, d_c: usize, d_a: usize, d_b: usize, origin: ExtensionOrigin) -> Self {
        let dims = DimSpec::new(vec![d_a, d_b]).expect("positive dimensions");
        ChannelExtension { channel: Channel::from_choi_unchecked(choi.hermitian_part(), d_c, dims), origin }
    }

    /// Re-validate a constructed extension against the channel invariants.
    pub(crate) fn checked(self) -> Result<Self> {
        validate_choi(self.choi(), self.d_c(), self.d_a() * self.d_b(), true)?;
        Ok(self)
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn choi(&self) -> &Operator {
        &self.channel.choi
    }

    pub fn origin(&self) -> ExtensionOrigin {
        self.origin
    }

    pub fn d_c(&self) -> usize {
        self.channel.d_in
    }

    pub fn d_a(&self) -> usize {
        self.channel.d_out.dims()[0]
    }

    pub fn d_b(&self) -> usize {
        self.channel.d_out.dims()[1]
    }

    /// `[d_C, d_A, d_B]`
    pub fn choi_dims(&self) -> DimSpec {
        DimSpec::new(vec![self.d_c(), self.d_a(), self.d_b()]).expect("positive dimensions")
    }
}

/// `J = Σ_i (I ⊗ K_i) ψ₊ (I ⊗ K_i)†`; the set must be trace preserving.
pub fn choi_from_kraus(k: &KrausSet) -> Result<Channel> {
    k.require_tp()?;
    let choi = choi_of_operators(&k.operators).hermitian_part();
    Ok(Channel::from_choi_unchecked(choi, k.d_in(), DimSpec::new(vec![k.d_out()])?))
}

/// Kraus operators from the spectral decomposition of `d_in · J`. Eigenvalues
/// at or below the Kraus cutoff are dropped; each returned operator carries
/// a phase making its largest entry real positive.
pub fn kraus_from_choi(c: &Channel) -> Result<KrausSet> {
    let (d_in, d_out) = (c.d_in, c.out_dim());
    let scaled = c.choi.scale(d_in as f64);
    let eig = eig_hermitian(&scaled)?;
    if let Some(&lmin) = eig.values.first() {
        if lmin < -tol::PSD * d_in as f64 {
            return Err(Error::invariant("choi ⪰ 0", format!("min eigenvalue {:.3e}", lmin / d_in as f64)));
        }
    }
    let mut ops = Vec::new();
    for (k, &w) in eig.values.iter().enumerate().rev() {
        if w <= tol::KRAUS_CUTOFF {
            continue;
        }
        let col = eig.column(k);
        let pivot = col.data().iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(ZERO);
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
        let s = w.sqrt();
        ops.push(Operator::from_fn(d_out, d_in, |o, i| col[(i * d_out + o, 0)] * phase * s));
    }
    if ops.is_empty() {
        return Err(Error::invariant("choi ≠ 0", "no eigenvalue above the Kraus cutoff"));
    }
    Ok(KrausSet { operators: ops })
}

/// `V = Σ_i |i⟩_A ⊗ K_i`, with the environment `A` first.
pub fn stinespring_from_kraus(k: &KrausSet) -> Result<StinespringIsometry> {
    k.require_tp()?;
    let (r, d_out, d_in) = (k.len(), k.d_out(), k.d_in());
    let v = Operator::from_fn(r * d_out, d_in, |row, c| k.operators[row / d_out][(row % d_out, c)]);
    StinespringIsometry::new(v, r, d_out)
}

/// `Λ ⊗ id_D` applied to a density operator on `C ⊗ D`.
pub fn apply(c: &Channel, rho: &Operator, ancilla_dim: usize) -> Result<Operator> {
    let n = c.d_in * ancilla_dim;
    if ancilla_dim == 0 || !rho.is_square() || rho.rows() != n {
        return Err(Error::dims(format!("input must be {n}×{n}, got {}×{}", rho.rows(), rho.cols())));
    }
    let defect = rho.hermiticity_defect();
    if defect > tol::HERMITIAN {
        return Err(Error::NotHermitian { deviation: defect });
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > tol::TP {
        return Err(Error::invariant("Tr ρ = 1", format!("trace {:.12}", tr.re)));
    }
    Ok(apply_linear(&c.choi, c.d_in, c.out_dim(), rho, ancilla_dim))
}
