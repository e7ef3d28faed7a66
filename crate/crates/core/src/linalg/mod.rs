//! Dense complex linear algebra: the operator carrier, tensor-factor
//! manipulation, and Hermitian spectral routines.

mod operator;
mod spectral;
mod tensor;

pub use operator::{pauli, Operator, C64, I, ONE, ZERO};
pub use spectral::{
    eig_hermitian, is_psd, max_eigenvalue, min_eigenvalue, psd_projection, rank, sqrt_psd, HermitianEigen,
};
pub(crate) use spectral::{from_nalgebra, to_nalgebra};
pub use tensor::{embed_local, partial_trace, partial_transpose, permute_subsystems, DimSpec};

/// Kronecker product.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kron(b)
}

/// Kronecker product of a sequence, left to right.
pub fn kron_all<'a>(ops: impl IntoIterator<Item = &'a Operator>) -> Operator {
    ops.into_iter().fold(Operator::identity(1), |acc, op| acc.kron(op))
}

/// Normalized maximally entangled projector ψ₊ = (1/d) Σ_ij |ii⟩⟨jj|.
pub fn max_entangled(d: usize) -> Operator {
    let scale = 1.0 / d as f64;
    Operator::from_fn(d * d, d * d, |r, c| {
        let (i, i2) = (r / d, r % d);
        let (j, j2) = (c / d, c % d);
        if i == i2 && j == j2 {
            C64::new(scale, 0.0)
        } else {
            ZERO
        }
    })
}
