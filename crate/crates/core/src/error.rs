use thiserror::Error;

use crate::sdp::SdpStatus;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("non-finite entry in operator")]
    NonFinite,

    #[error("invariant `{invariant}` violated: {detail}")]
    Invariant { invariant: &'static str, detail: String },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("deterministic strategy count {count} exceeds cap {cap}")]
    StrategyCap { count: usize, cap: usize },

    #[error("rank-deficient probe set: rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },

    #[error("singular Newton system (condition estimate {condition:.3e})")]
    SingularNewton { condition: f64 },

    #[error("solver did not certify a result (status {status:?}): {detail}")]
    Solver { status: SdpStatus, detail: String },

    #[error("cross-check mismatch: {0}")]
    Mismatch(String),

    #[error("input dimension {dim} exceeds the search cap {cap}")]
    SearchCap { dim: usize, cap: usize },
}

impl Error {
    pub(crate) fn invariant(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant { invariant, detail: detail.into() }
    }

    pub(crate) fn dims(detail: impl Into<String>) -> Self {
        Error::DimensionMismatch(detail.into())
    }

    /// True for failures that originate in the numerical solver rather than
    /// in malformed input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::SingularNewton { .. } | Error::Solver { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
