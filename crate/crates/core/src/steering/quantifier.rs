//! Steerability of an extension as a function of the input state.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::assemblage::{choi_state_assemblage, contract_first, induced_channel_assemblage, MeasurementAssemblage, StateAssemblage};
use super::programs::{steerable_weight, steering_robustness, Quantity};
use crate::channels::ChannelExtension;
use crate::error::{Error, Result};
use crate::linalg::{Operator, C64};
use crate::par::{self, Execution};

/// Largest input dimension accepted by the pure-input search.
pub const SEARCH_DIM_CAP: usize = 4;
const GRID_POINTS: usize = 17;
const REFINE_TOL: f64 = 1e-4;
const MAX_SWEEPS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputMode {
    /// Maximally entangled input on `C ⊗ C′`.
    Choi,
    /// Maximize over pure inputs `Σ_i c_i |i⟩|i⟩`, never returning less than
    /// the maximally entangled value.
    Search,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantifierReport {
    pub quantity: Quantity,
    pub mode: InputMode,
    pub value: f64,
    pub choi_value: f64,
    pub search_value: Option<f64>,
    /// Schmidt coefficients of the best input found by the search.
    pub best_schmidt: Option<Vec<f64>>,
    pub evaluations: usize,
}

/// Unit vector from hyperspherical angles in `[0, π/2]`: all coordinates ≥ 0.
fn schmidt_from_angles(angles: &[f64]) -> Vec<f64> {
    let mut c = Vec::with_capacity(angles.len() + 1);
    let mut s = 1.0;
    for &t in angles {
        c.push(s * t.cos());
        s *= t.sin();
    }
    c.push(s);
    c
}

/// Angles reproducing the uniform Schmidt vector.
fn uniform_angles(d: usize) -> Vec<f64> {
    (0..d - 1).map(|i| (1.0 / ((d - i) as f64).sqrt()).acos()).collect()
}

/// Assemblage steered on `B ⊗ C′` when `Σ_i c_i |i⟩_C |i⟩_{C′}` is sent
/// through the extension and Alice measures `A`.
pub fn pure_input_assemblage(e: &ChannelExtension, ma: &MeasurementAssemblage, schmidt: &[f64]) -> Result<StateAssemblage> {
    let d = e.d_c();
    if schmidt.len() != d {
        return Err(Error::LengthMismatch { expected: d, got: schmidt.len() });
    }
    if ma.dim() != e.d_a() {
        return Err(Error::dims("measurement dimension does not match Alice's output"));
    }
    let norm = schmidt.iter().map(|c| c * c).sum::<f64>().sqrt();
    let psi = Operator::from_fn(d * d, 1, |r, _| {
        if r / d == r % d {
            C64::new(schmidt[r / d] / norm, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let out = e.channel().apply(&Operator::outer(&psi), d)?;
    let rest = e.d_b() * d;
    let members = ma
        .povms()
        .iter()
        .map(|p| p.iter().map(|m| contract_first(&out, e.d_a(), rest, m)).collect())
        .collect();
    StateAssemblage::new(members)
}

fn evaluate(q: Quantity, sa: &StateAssemblage) -> Result<f64> {
    match q {
        Quantity::Robustness => Ok(steering_robustness(sa)?.value),
        Quantity::Weight => Ok(steerable_weight(sa)?.value),
        Quantity::Feasibility => Err(Error::invariant("quantifier is robustness or weight", "got feasibility")),
    }
}

pub fn channel_quantifier(e: &ChannelExtension, ma: &MeasurementAssemblage, q: Quantity, mode: InputMode) -> Result<f64> {
    Ok(channel_quantifier_report(e, ma, q, mode, Execution::default())?.value)
}

pub fn channel_quantifier_report(
    e: &ChannelExtension,
    ma: &MeasurementAssemblage,
    q: Quantity,
    mode: InputMode,
    exec: Execution,
) -> Result<QuantifierReport> {
    let choi_value = evaluate(q, &choi_state_assemblage(&induced_channel_assemblage(e, ma)?))?;
    let mut report = QuantifierReport {
        quantity: q,
        mode,
        value: choi_value,
        choi_value,
        search_value: None,
        best_schmidt: None,
        evaluations: 1,
    };
    if mode == InputMode::Choi {
        return Ok(report);
    }
    let d = e.d_c();
    if d > SEARCH_DIM_CAP {
        return Err(Error::SearchCap { dim: d, cap: SEARCH_DIM_CAP });
    }
    let f = |angles: &[f64]| evaluate(q, &pure_input_assemblage(e, ma, &schmidt_from_angles(angles))?);
    if d == 1 {
        report.search_value = Some(f(&[])?);
        report.best_schmidt = Some(vec![1.0]);
        report.value = report.value.max(report.search_value.unwrap_or(f64::NEG_INFINITY));
        return Ok(report);
    }

    let dims = d - 1;
    let step = FRAC_PI_2 / (GRID_POINTS - 1) as f64;
    let total = GRID_POINTS.pow(dims as u32);
    let grid = par::map_range(exec, total, |idx| {
        let angles: Vec<f64> = (0..dims).map(|j| ((idx / GRID_POINTS.pow(j as u32)) % GRID_POINTS) as f64 * step).collect();
        f(&angles).map(|v| (v, angles))
    });
    let mut evaluations = 1 + total;
    let mut best = (f64::NEG_INFINITY, uniform_angles(d));
    for r in grid {
        let (v, a) = r?;
        if v > best.0 {
            best = (v, a);
        }
    }
    // Start from the maximally entangled point when it beats the grid.
    if choi_value > best.0 {
        best = (choi_value, uniform_angles(d));
    }

    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..MAX_SWEEPS {
        let before = best.0;
        for j in 0..dims {
            let (mut lo, mut hi) = ((best.1[j] - step).max(0.0), (best.1[j] + step).min(FRAC_PI_2));
            let at = |t: f64, base: &[f64]| {
                let mut a = base.to_vec();
                a[j] = t;
                a
            };
            let base = best.1.clone();
            let mut x1 = hi - phi * (hi - lo);
            let mut x2 = lo + phi * (hi - lo);
            let mut f1 = f(&at(x1, &base))?;
            let mut f2 = f(&at(x2, &base))?;
            evaluations += 2;
            while hi - lo > REFINE_TOL {
                if f1 >= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - phi * (hi - lo);
                    f1 = f(&at(x1, &base))?;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + phi * (hi - lo);
                    f2 = f(&at(x2, &base))?;
                }
                evaluations += 1;
            }
            let (v, t) = if f1 >= f2 { (f1, x1) } else { (f2, x2) };
            if v > best.0 {
                best = (v, at(t, &base));
            }
        }
        if best.0 - before <= 1e-9 {
            break;
        }
    }
    report.search_value = Some(best.0);
    report.best_schmidt = Some(schmidt_from_angles(&best.1));
    report.value = choi_value.max(best.0);
    report.evaluations = evaluations;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_angles_give_uniform_schmidt_vector() {
        for d in 2..=4 {
            let c = schmidt_from_angles(&uniform_angles(d));
            for ci in c {
                assert!((ci - 1.0 / (d as f64).sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn schmidt_vectors_are_normalized_and_nonnegative() {
        let c = schmidt_from_angles(&[0.3, 1.2, 0.0]);
        assert!((c.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(c.iter().all(|&x| x >= 0.0));
    }
}
