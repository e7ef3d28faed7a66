use nalgebra::DMatrix;

use super::operator::{Operator, C64};
use crate::error::{Error, Result};
use crate::tol;

/// Eigen-decomposition of a Hermitian operator.
///
/// Eigenvalues are ascending; `vectors` holds the matching orthonormal
/// eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Operator,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> Operator {
        let d = Operator::diag_real(&self.values);
        self.vectors.matmul(&d).matmul(&self.vectors.adjoint())
    }

    pub fn column(&self, k: usize) -> Operator {
        let n = self.vectors.rows();
        Operator::from_fn(n, 1, |r, _| self.vectors.get(r, k))
    }
}

pub(crate) fn to_nalgebra(m: &Operator) -> DMatrix<C64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.data())
}

pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Operator {
    Operator::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// Spectral decomposition; input must be Hermitian within `tol::HERMITIAN`.
pub fn eig_hermitian(m: &Operator) -> Result<HermitianEigen> {
    let defect = m.hermiticity_defect();
    if defect > tol::HERMITIAN {
        return Err(Error::NotHermitian { deviation: defect });
    }
    eig_unchecked(&m.hermitian_part())
}

fn eig_unchecked(h: &Operator) -> Result<HermitianEigen> {
    let eig = nalgebra::SymmetricEigen::new(to_nalgebra(h));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = h.rows();
    let vectors = Operator::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Smallest eigenvalue of a Hermitian matrix (input is symmetrized first, so
/// the caller is responsible for Hermiticity).
pub fn min_eigenvalue(m: &Operator) -> f64 {
    let h = m.hermitian_part();
    nalgebra::SymmetricEigen::new(to_nalgebra(&h))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_eigenvalue(m: &Operator) -> f64 {
    let h = m.hermitian_part();
    nalgebra::SymmetricEigen::new(to_nalgebra(&h))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// True iff `m` is Hermitian within `tol` and its smallest eigenvalue is ≥ −tol.
pub fn is_psd(m: &Operator, tol: f64) -> Result<bool> {
    let defect = m.hermiticity_defect();
    if defect > tol.max(tol::HERMITIAN) {
        return Err(Error::NotHermitian { deviation: defect });
    }
    Ok(min_eigenvalue(m) >= -tol)
}

/// Project a Hermitian matrix onto the PSD cone by clipping negative eigenvalues.
pub fn psd_projection(m: &Operator) -> Result<Operator> {
    let mut eig = eig_unchecked(&m.hermitian_part())?;
    for v in &mut eig.values {
        *v = v.max(0.0);
    }
    Ok(eig.reconstruct())
}

/// Principal square root of a PSD matrix (negative eigenvalues clipped).
pub fn sqrt_psd(m: &Operator) -> Result<Operator> {
    let mut eig = eig_unchecked(&m.hermitian_part())?;
    for v in &mut eig.values {
        *v = v.max(0.0).sqrt();
    }
    Ok(eig.reconstruct())
}

/// Numerical rank of an arbitrary matrix via singular values, relative to the
/// largest one.
pub fn rank(m: &Operator, threshold: f64) -> usize {
    let svd = to_nalgebra(m).svd(false, false);
    let s = &svd.singular_values;
    let top = s.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > threshold * top).count()
}
