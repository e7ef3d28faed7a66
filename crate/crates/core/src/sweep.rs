//! One-parameter families of steering scenarios evaluated over a grid.

use serde::{Deserialize, Serialize};

use crate::channels::{dilation, KrausSet};
use crate::error::{Error, Result};
use crate::linalg::max_entangled;
use crate::par::{self, Execution};
use crate::steering::{
    choi_state_assemblage, induced_channel_assemblage, steerable_weight, steering_robustness, MeasurementAssemblage,
    Quantity, StateAssemblage, SteeringVerdict,
};

/// Families indexed by a single real parameter in `[0, 1]`, all measured
/// with Pauli X and Z on Alice's qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    /// Kraus dilation of amplitude damping with decay `γ`.
    Gamma,
    /// Kraus dilation of phase flip with probability `p`.
    Dephasing,
    /// Maximally entangled pair mixed with white noise, visibility `η`.
    Visibility,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(SweepParam::Gamma),
            "dephasing" => Ok(SweepParam::Dephasing),
            "visibility" => Ok(SweepParam::Visibility),
            other => Err(Error::invariant("sweep parameter is gamma, dephasing or visibility", other.to_string())),
        }
    }
}

impl SweepParam {
    pub fn assemblage(self, t: f64) -> Result<StateAssemblage> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invariant("sweep parameter in [0, 1]", format!("{t}")));
        }
        let ma = MeasurementAssemblage::pauli_xz();
        let via_dilation = |k: KrausSet| -> Result<StateAssemblage> {
            Ok(choi_state_assemblage(&induced_channel_assemblage(&dilation(&k)?, &ma)?))
        };
        match self {
            SweepParam::Gamma => via_dilation(KrausSet::amplitude_damping(t)?),
            SweepParam::Dephasing => via_dilation(KrausSet::dephasing(t)?),
            SweepParam::Visibility => StateAssemblage::from_bipartite(&max_entangled(2), 2, &ma)?.with_white_noise(t),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub value: f64,
    /// `steerable`, `unsteerable`, `boundary` or `error`.
    pub status: String,
    pub gap: f64,
    pub iterations: usize,
}

impl SweepRow {
    fn from_verdict(parameter: f64, v: &SteeringVerdict) -> Self {
        let status = if v.boundary {
            "boundary"
        } else if v.steerable {
            "steerable"
        } else {
            "unsteerable"
        };
        let (gap, iterations) = v.diagnostics.as_ref().map_or((f64::NAN, 0), |d| (d.gap, d.iterations));
        SweepRow { parameter, value: v.value, status: status.into(), gap, iterations }
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Rows in the order of `values`, whatever order the solves finish in.
pub fn run_sweep(param: SweepParam, measure: Quantity, values: &[f64], exec: Execution) -> Result<Vec<SweepRow>> {
    if measure == Quantity::Feasibility {
        return Err(Error::invariant("sweep measure is robustness or weight", "got feasibility"));
    }
    par::map(exec, values, |&t| {
        let sa = param.assemblage(t)?;
        let v = match measure {
            Quantity::Weight => steerable_weight(&sa),
            _ => steering_robustness(&sa),
        };
        Ok(match v {
            Ok(v) => SweepRow::from_verdict(t, &v),
            Err(e) if e.is_solver_failure() => {
                SweepRow { parameter: t, value: f64::NAN, status: "error".into(), gap: f64::NAN, iterations: 0 }
            }
            Err(e) => return Err(e),
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(linspace(0.3, 0.9, 1), vec![0.3]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }

    #[test]
    fn parse_names() {
        assert_eq!("gamma".parse::<SweepParam>().unwrap(), SweepParam::Gamma);
        assert!("theta".parse::<SweepParam>().is_err());
    }

    #[test]
    fn rows_keep_parameter_order() {
        let vals = linspace(0.0, 1.0, 6);
        let seq = run_sweep(SweepParam::Visibility, Quantity::Robustness, &vals, Execution::Sequential).unwrap();
        let par = run_sweep(SweepParam::Visibility, Quantity::Robustness, &vals, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        assert!(seq.windows(2).all(|w| w[0].parameter < w[1].parameter));
        assert_eq!(seq[0].status, "unsteerable");
        assert_eq!(seq[5].status, "steerable");
    }

    #[test]
    fn full_phase_flip_dilation_is_maximally_steerable() {
        // p = 1/2 makes the environment hold a full copy of the phase.
        let r = run_sweep(SweepParam::Dephasing, Quantity::Robustness, &[0.0, 0.5], Execution::Sequential).unwrap();
        assert!(r[0].value.abs() < 1e-7);
        assert!((r[1].value - (3.0 - 2.0 * std::f64::consts::SQRT_2)).abs() < 1e-6);
    }

    #[test]
    fn out_of_range_parameter_rejected() {
        assert!(run_sweep(SweepParam::Gamma, Quantity::Weight, &[1.5], Execution::Sequential).is_err());
    }
}
