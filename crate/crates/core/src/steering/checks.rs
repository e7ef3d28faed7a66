//! Cross-checks linking channel steering to state steering.

use serde::{Deserialize, Serialize};

use super::assemblage::{
    choi_state_assemblage, contract_alice, induced_channel_assemblage, ChannelAssemblage, MeasurementAssemblage,
    StateAssemblage,
};
use super::programs::{steering_robustness, test_unsteerable, SteeringVerdict};
use super::strategies::DeterministicStrategySet;
use crate::channels::{Channel, ChannelExtension, ExtensionOrigin};
use crate::error::{Error, Result};
use crate::linalg::{kron_all, min_eigenvalue, partial_transpose, permute_subsystems, DimSpec, Operator};
use crate::tol;

/// Allowed disagreement between the robustness values of the two routes.
const ROUTE_AGREEMENT: f64 = 1e-6;
/// Allowed violation of the processing identity.
const COVARIANCE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    /// Induced channel assemblage, then its Choi states on `C′ ⊗ B`.
    pub via_channels: SteeringVerdict,
    /// Alice measures the Choi state directly; Bob holds `B ⊗ C′`.
    pub via_state: SteeringVerdict,
    pub robustness_via_channels: f64,
    pub robustness_via_state: f64,
}

/// Decide steerability of `(e, ma)` along both routes and demand agreement of
/// verdicts and of robustness within 1e-6.
pub fn verify_theorem1(e: &ChannelExtension, ma: &MeasurementAssemblage) -> Result<Theorem1Report> {
    let sa1 = choi_state_assemblage(&induced_channel_assemblage(e, ma)?);
    let (j_abc, _) = permute_subsystems(e.choi(), &e.choi_dims(), &[1, 2, 0])?;
    let sa2 = StateAssemblage::from_bipartite(&j_abc, e.d_a(), ma)?;
    let via_channels = test_unsteerable(&sa1)?;
    let via_state = test_unsteerable(&sa2)?;
    let r1 = steering_robustness(&sa1)?.value;
    let r2 = steering_robustness(&sa2)?.value;
    if via_channels.steerable != via_state.steerable || (r1 - r2).abs() > ROUTE_AGREEMENT {
        return Err(Error::Mismatch(format!(
            "routes disagree: steerable {} vs {}, robustness {r1:.9} vs {r2:.9}",
            via_channels.steerable, via_state.steerable
        )));
    }
    Ok(Theorem1Report { via_channels, via_state, robustness_via_channels: r1, robustness_via_state: r2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PptStatus {
    Consistent,
    Violation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub origin: ExtensionOrigin,
    /// Smallest eigenvalue of the Choi operator transposed on `A`.
    pub min_pt_eigenvalue: f64,
    pub ppt: bool,
    pub status: PptStatus,
    /// NPT proves the extension coherent; PPT alone does not prove it incoherent.
    pub coherent_certified: bool,
}

/// Necessary condition for incoherence: the Choi operator is PPT across `A : BC′`.
/// A violation is reported only for extensions built as incoherent ones.
pub fn theorem2_necessary_check(e: &ChannelExtension) -> Theorem2Report {
    let pt = partial_transpose(e.choi(), &e.choi_dims(), 1).expect("consistent dimensions");
    let lmin = min_eigenvalue(&pt);
    let ppt = lmin >= -tol::STEERING_BAND;
    let status = if !ppt && e.origin() == ExtensionOrigin::Incoherent { PptStatus::Violation } else { PptStatus::Consistent };
    Theorem2Report { origin: e.origin(), min_pt_eigenvalue: lmin, ppt, status, coherent_certified: !ppt }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    /// Largest member-wise distance between the two sides of the identity.
    pub max_deviation: f64,
    pub robustness_original: f64,
    pub robustness_processed: f64,
    pub monotone: bool,
}

/// `(Γ ⊗ id)∘Λ` measured by `{M_{a|x}}` must equal `Λ` measured by
/// `{Γ†[M_{a|x}]}`. The left side applies Γ through its Kraus operators and
/// the right side through the Choi formula of the dual map.
pub fn local_processing_covariance(
    e: &ChannelExtension,
    gamma: &Channel,
    ma: &MeasurementAssemblage,
) -> Result<CovarianceReport> {
    if gamma.d_in() != e.d_a() || ma.dim() != gamma.out_dim() {
        return Err(Error::dims("processing channel must map Alice's system onto the measured one"));
    }
    let (d_c, d_b) = (e.d_c(), e.d_b());
    let d_a2 = gamma.out_dim();
    let (ic, ib) = (Operator::identity(d_c), Operator::identity(d_b));
    let processed: Operator = gamma
        .kraus()?
        .operators()
        .iter()
        .map(|k| kron_all([&ic, k, &ib]).sandwich(e.choi()))
        .sum();
    let processed = ChannelExtension::new(processed.hermitian_part(), d_c, d_a2, d_b)?;
    let left = induced_channel_assemblage(&processed, ma)?;
    let pulled = ma.map_effects(|m| Ok(gamma.dual(m)?.hermitian_part()))?;
    let right = induced_channel_assemblage(e, &pulled)?;
    let dev = left.distance(&right);
    if dev > COVARIANCE_TOL {
        return Err(Error::Mismatch(format!("processing identity violated by {dev:.3e}")));
    }
    let r_proc = steering_robustness(&choi_state_assemblage(&left))?.value;
    let r_orig = if e.d_a() == d_a2 {
        steering_robustness(&choi_state_assemblage(&induced_channel_assemblage(e, ma)?))?.value
    } else {
        f64::NAN
    };
    Ok(CovarianceReport {
        max_deviation: dev,
        robustness_original: r_orig,
        robustness_processed: r_proc,
        monotone: r_proc <= r_orig + ROUTE_AGREEMENT,
    })
}

/// From a model `{X_λ}` of a Choi assemblage on `C′ ⊗ B`, the pointer
/// extension `Σ_λ |λ⟩⟨λ| ⊗ Λ_λ` with `J(Λ_λ) = X_λ`, the measurements
/// `M_{a|x} = Σ_λ D_λ(a|x) |λ⟩⟨λ|`, and the largest member-wise error of the
/// assemblage they induce.
pub fn converse_extension(
    model: &[Operator],
    target: &ChannelAssemblage,
) -> Result<(ChannelExtension, MeasurementAssemblage, f64)> {
    let s = DeterministicStrategySet::new(target.settings(), target.outcomes())?;
    if model.len() != s.len() {
        return Err(Error::LengthMismatch { expected: s.len(), got: model.len() });
    }
    let (d_c, d_b, n) = (target.d_in(), target.d_out(), s.len());
    // Σ_λ X_λ ⊗ |λ⟩⟨λ| in (C′, B, A) order, then moved to (C′, A, B).
    let stacked: Operator = model.iter().enumerate().map(|(l, x)| x.kron(&Operator::basis_projector(n, l))).sum();
    let (choi, _) = permute_subsystems(&stacked, &DimSpec::new(vec![d_c, d_b, n])?, &[0, 2, 1])?;
    let ext = ChannelExtension::from_parts(choi, d_c, n, d_b, ExtensionOrigin::Incoherent);
    let povms: Vec<Vec<Operator>> = (0..s.settings())
        .map(|x| {
            (0..s.outcomes())
                .map(|a| Operator::diag_real(&(0..n).map(|l| if s.indicator(l, a, x) { 1.0 } else { 0.0 }).collect::<Vec<_>>()))
                .collect()
        })
        .collect();
    let ma = MeasurementAssemblage::new(povms)?;
    let dims = ext.choi_dims();
    let mut err = 0.0f64;
    for x in 0..s.settings() {
        for a in 0..s.outcomes() {
            let rebuilt = contract_alice(ext.choi(), &dims, ma.effect(a, x));
            err = err.max(rebuilt.distance(target.member(a, x).choi()));
        }
    }
    Ok((ext, ma, err))
}
