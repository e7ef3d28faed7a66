//! Block semidefinite programming in standard form
//!
//! ```text
//! min ⟨C, X⟩  s.t.  ⟨A_i, X⟩ = b_i,  X ⪰ 0
//! max bᵀy     s.t.  Σ y_i A_i + Z = C,  Z ⪰ 0
//! ```
//!
//! over block-diagonal real symmetric X, with a complex Hermitian embedding
//! for programs posed on complex matrices.

mod embed;
mod ipm;
mod problem;

pub use embed::{embed_complex, extract_complex, hermitian_basis, hermitian_coordinates};
pub(crate) use embed::embed_sparse;
pub use ipm::{check_feasible, set_default_tolerance, solve, solve_with, FeasibilityOutcome, Phase1, SolverOptions, FEASIBILITY_SHIFT};
pub use problem::{
    sym_inner, Constraint, FarkasCertificate, SdpProblem, SdpSolution, SdpStatus, SolverDiagnostics, SymMatrix,
};

#[cfg(test)]
mod tests;
