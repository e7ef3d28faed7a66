use serde::{Deserialize, Serialize};

use super::types::{
    apply_linear, stinespring_from_kraus, Channel, ChannelExtension, ExtensionOrigin, Instrument, KrausSet, Subchannel,
};
use crate::error::{Error, Result};
use crate::linalg::{
    max_entangled, min_eigenvalue, partial_trace, partial_transpose, permute_subsystems, DimSpec, Operator,
};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Party {
    A,
    B,
}

/// An extension `X ↦ Σ_λ σ_λ^A ⊗ Λ_λ(X)^B` kept together with its
/// separable decomposition.
#[derive(Clone, Debug)]
pub struct IncoherentParts {
    pub instrument: Instrument,
    pub states: Vec<Operator>,
}

impl IncoherentParts {
    pub fn new(instrument: Instrument, states: Vec<Operator>) -> Result<Self> {
        if states.len() != instrument.len() {
            return Err(Error::LengthMismatch { expected: instrument.len(), got: states.len() });
        }
        let d_a = states[0].rows();
        for s in &states {
            if !s.is_square() || s.rows() != d_a {
                return Err(Error::dims("flag states must share one square dimension"));
            }
            let defect = s.hermiticity_defect();
            if defect > tol::HERMITIAN {
                return Err(Error::NotHermitian { deviation: defect });
            }
            let tr = s.trace().re;
            if (tr - 1.0).abs() > tol::TP {
                return Err(Error::invariant("Tr σ_λ = 1", format!("trace {tr:.12}")));
            }
            let lmin = min_eigenvalue(s);
            if lmin < -tol::PSD {
                return Err(Error::invariant("σ_λ ⪰ 0", format!("min eigenvalue {lmin:.3e}")));
            }
        }
        Ok(IncoherentParts { instrument, states })
    }

    pub fn extension(&self) -> ChannelExtension {
        let (d_c, d_b, d_a) = (self.instrument.d_in(), self.instrument.d_out(), self.states[0].rows());
        let stacked: Operator =
            self.instrument.members().iter().zip(&self.states).map(|(m, s)| m.choi().kron(s)).sum();
        let dims = DimSpec::new(vec![d_c, d_b, d_a]).expect("positive dimensions");
        let (choi, _) = permute_subsystems(&stacked, &dims, &[0, 2, 1]).expect("consistent dimensions");
        ChannelExtension::from_parts(choi, d_c, d_a, d_b, ExtensionOrigin::Incoherent)
    }

    /// Terms `(σ_λ, Λ_λ(ρ))` whose tensor products sum to the output on `A ⊗ B`.
    pub fn decompose_output(&self, rho: &Operator) -> Result<Vec<(Operator, Operator)>> {
        self.instrument
            .members()
            .iter()
            .zip(&self.states)
            .map(|(m, s)| Ok((s.clone(), m.apply(rho, 1)?)))
            .collect()
    }
}

/// `Σ_λ σ_λ^A ⊗ Λ_λ` with normalized flag states `σ_λ`.
pub fn incoherent_extension(inst: &Instrument, states: &[Operator]) -> Result<ChannelExtension> {
    Ok(IncoherentParts::new(inst.clone(), states.to_vec())?.extension())
}

/// Incoherent extension with orthonormal flags `|λ⟩⟨λ|`.
pub fn pointer_extension(inst: &Instrument) -> ChannelExtension {
    let n = inst.len();
    let flags: Vec<Operator> = (0..n).map(|l| Operator::basis_projector(n, l)).collect();
    IncoherentParts { instrument: inst.clone(), states: flags }.extension()
}

/// `X ↦ Σ_i |i⟩⟨i|^A ⊗ K_i X K_i†`: records which Kraus operator acted.
pub fn kraus_pointer_extension(k: &KrausSet) -> Result<ChannelExtension> {
    let groups: Vec<Vec<Operator>> = k.operators().iter().map(|op| vec![op.clone()]).collect();
    let inst = Instrument::from_kraus_groups(&groups)?;
    Ok(pointer_extension(&inst))
}

/// `Σ_λ p_λ |λ⟩⟨λ|^A ⊗ Λ̂_λ` for channels `Λ̂_λ` and a probability vector `p`.
pub fn channel_convex_extension(channels: &[Channel], probs: &[f64]) -> Result<ChannelExtension> {
    if channels.len() != probs.len() || channels.is_empty() {
        return Err(Error::LengthMismatch { expected: channels.len(), got: probs.len() });
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tol::PROBABILITY || probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::invariant("p is a probability vector", format!("sum {total:.12}")));
    }
    let (d_in, d_out) = (channels[0].d_in(), channels[0].out_dim());
    if channels.iter().any(|c| c.d_in() != d_in || c.out_dim() != d_out) {
        return Err(Error::dims("channels in a convex extension must share dimensions"));
    }
    let members =
        channels.iter().zip(probs).map(|(c, &p)| c.as_subchannel().scale(p)).collect::<Vec<Subchannel>>();
    Ok(pointer_extension(&Instrument::new(members)?))
}

/// The basis-indexed Kraus dilation `X ↦ V X V†` with `V = Σ_i |i⟩_A ⊗ K_i`.
pub fn dilation(k: &KrausSet) -> Result<ChannelExtension> {
    Ok(stinespring_from_kraus(k)?.extension())
}

/// `X ↦ X^A ⊗ σ^B`: perfectly coherent towards A, constant towards B.
pub fn identity_with_constant(d: usize, sigma: &Operator) -> Result<ChannelExtension> {
    ChannelExtension::new(max_entangled(d).kron(sigma), d, d, sigma.rows())
}

/// Reduced channel onto one receiver.
pub fn marginal(e: &ChannelExtension, keep: Party) -> Channel {
    let keep_idx = match keep {
        Party::A => [0, 1],
        Party::B => [0, 2],
    };
    let choi = partial_trace(e.choi(), &e.choi_dims(), &keep_idx).expect("consistent dimensions");
    let d = match keep {
        Party::A => e.d_a(),
        Party::B => e.d_b(),
    };
    Channel::from_choi_unchecked(choi.hermitian_part(), e.d_c(), DimSpec::new(vec![d]).expect("positive"))
}

/// Generalized complementary channel: the A-marginal.
pub fn complementary(e: &ChannelExtension) -> Channel {
    marginal(e, Party::A)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EbStatus {
    EbCertified,
    NotEb,
    Inconclusive,
}

/// PPT test of the Choi operator across `C′ : out`. PPT is sufficient for
/// separability only when `d_in · d_out ≤ 6`.
pub fn eb_check(c: &Channel) -> EbStatus {
    let dims = DimSpec::new(vec![c.d_in(), c.out_dim()]).expect("positive dimensions");
    let pt = partial_transpose(c.choi(), &dims, 1).expect("consistent dimensions");
    if min_eigenvalue(&pt) < -tol::PSD {
        EbStatus::NotEb
    } else if c.d_in() * c.out_dim() <= 6 {
        EbStatus::EbCertified
    } else {
        EbStatus::Inconclusive
    }
}

/// Effects `M_λ = Λ_λ†(I)` of an instrument; they form a POVM on the input.
pub fn povm_from_instrument(inst: &Instrument) -> Vec<Operator> {
    let id = Operator::identity(inst.d_out());
    inst.members().iter().map(|m| m.dual(&id).expect("output dimension").hermitian_part()).collect()
}

/// `(Γ ⊗ id_B) ∘ Λ` for a channel `Γ` acting on Alice's output.
pub fn process_alice(e: &ChannelExtension, gamma: &Channel) -> Result<ChannelExtension> {
    if gamma.d_in() != e.d_a() {
        return Err(Error::dims(format!("processing channel input {} ≠ d_A {}", gamma.d_in(), e.d_a())));
    }
    let d_a2 = gamma.out_dim();
    let (d_c, d_a, d_b) = (e.d_c(), e.d_a(), e.d_b());
    // Apply Γ to the A factor of J treated as an operator on A ⊗ (C′B).
    let dims = e.choi_dims();
    let (j_acb, _) = permute_subsystems(e.choi(), &dims, &[1, 0, 2])?;
    let rest = d_c * d_b;
    let out = apply_linear(gamma.choi(), d_a, d_a2, &j_acb, rest);
    let dims2 = DimSpec::new(vec![d_a2, d_c, d_b])?;
    let (choi, _) = permute_subsystems(&out, &dims2, &[1, 0, 2])?;
    let origin = match e.origin() {
        ExtensionOrigin::Incoherent => ExtensionOrigin::Incoherent,
        _ => ExtensionOrigin::Generic,
    };
    ChannelExtension::from_parts(choi, d_c, d_a2, d_b, origin).checked()
}
