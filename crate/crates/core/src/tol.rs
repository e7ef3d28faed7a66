//! Numerical tolerances shared across the crate.
//!
//! Every threshold used to accept or reject an invariant lives here so that
//! callers (and the CLI `--tol` flag) have a single place to look.

/// Max-abs deviation from Hermiticity accepted by spectral routines.
pub const HERMITIAN: f64 = 1e-10;
/// Eigenvalue slack for positivity of Choi operators and POVM elements.
pub const PSD: f64 = 1e-9;
/// Trace-preservation and completeness slack.
pub const TP: f64 = 1e-9;
/// Eigenvalue cutoff deciding Kraus rank.
pub const KRAUS_CUTOFF: f64 = 1e-9;
/// Consistency slack for assemblages (Σ_a members independent of x).
pub const CONSISTENCY: f64 = 1e-8;
/// Probability-vector normalization slack.
pub const PROBABILITY: f64 = 1e-10;
/// Steerable/unsteerable decision threshold on the robustness value.
pub const STEERING_BOUNDARY: f64 = 1e-7;
/// Lower edge of the boundary band; values in (this, STEERING_BOUNDARY) get flagged.
pub const STEERING_BAND: f64 = 1e-8;
/// Member-wise reproduction error accepted for an unsteerable model.
pub const MODEL_REPRODUCTION: f64 = 1e-7;
/// Minimum separation demanded from a steering witness.
pub const WITNESS_GAP: f64 = 1e-6;
/// Rank threshold for probe sets and constraint reduction.
pub const RANK: f64 = 1e-9;
