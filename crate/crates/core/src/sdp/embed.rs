//! Complex Hermitian ↔ real symmetric embedding.
//!
//! `h ↦ [[Re h, −Im h], [Im h, Re h]]` is an order isomorphism on the PSD cone
//! and doubles every eigenvalue's multiplicity. Steering programs are built in
//! the complex domain and lowered through this map at the solver boundary.

use nalgebra::DMatrix;

use super::problem::SymMatrix;
use crate::error::{Error, Result};
use crate::linalg::{Operator, C64};
use crate::tol;

/// Real symmetric 2n×2n embedding of a Hermitian n×n operator.
pub fn embed_complex(h: &Operator) -> Result<Operator> {
    let defect = h.hermiticity_defect();
    if defect > tol::HERMITIAN {
        return Err(Error::NotHermitian { deviation: defect });
    }
    let d = embed_dense(h);
    Ok(Operator::from_fn(d.nrows(), d.ncols(), |r, c| C64::new(d[(r, c)], 0.0)))
}

pub(crate) fn embed_dense(h: &Operator) -> DMatrix<f64> {
    let n = h.rows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = h.get(r, c);
            m[(r, c)] = z.re;
            m[(n + r, n + c)] = z.re;
            m[(r, n + c)] = -z.im;
            m[(n + r, c)] = z.im;
        }
    }
    m
}

/// Sparse embedding of a Hermitian operator, scaled by `scale`.
pub(crate) fn embed_sparse(h: &Operator, scale: f64) -> SymMatrix {
    let n = h.rows();
    let mut s = SymMatrix::new(2 * n);
    for r in 0..n {
        for c in r..n {
            let z = h.get(r, c) * scale;
            if r == c {
                s.push(r, r, z.re);
                s.push(n + r, n + r, z.re);
            } else {
                s.push(r, c, z.re);
                s.push(n + r, n + c, z.re);
                // (r, n+c) holds −Im h[r,c]; (c, n+r) holds −Im h[c,r] = +Im h[r,c]
                s.push(r, n + c, -z.im);
                s.push(c, n + r, z.im);
            }
        }
    }
    s
}

/// Inverse map on the structured subspace, and the Hermitian "average" of an
/// arbitrary real symmetric 2n×2n matrix: `((Y11 + Y22) + i(Y21 − Y12)) / 2`.
///
/// For every Hermitian `h`, `Tr(h · extract(Y)) = ½⟨embed(h), Y⟩`, and `Y ⪰ 0`
/// implies `extract(Y) ⪰ 0`.
pub fn extract_complex(y: &DMatrix<f64>) -> Operator {
    let n = y.nrows() / 2;
    let h = Operator::from_fn(n, n, |r, c| {
        C64::new(
            0.5 * (y[(r, c)] + y[(n + r, n + c)]),
            0.5 * (y[(n + r, c)] - y[(r, n + c)]),
        )
    });
    h.hermitian_part()
}

/// Orthonormal (Hilbert–Schmidt) basis of n×n Hermitian matrices: n² elements,
/// diagonal units first, then symmetric and antisymmetric off-diagonal pairs.
pub fn hermitian_basis(n: usize) -> Vec<Operator> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(n * n);
    for j in 0..n {
        basis.push(Operator::basis_projector(n, j));
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut re = Operator::zeros(n, n);
            re[(j, k)] = C64::new(s, 0.0);
            re[(k, j)] = C64::new(s, 0.0);
            basis.push(re);
            let mut im = Operator::zeros(n, n);
            im[(j, k)] = C64::new(0.0, s);
            im[(k, j)] = C64::new(0.0, -s);
            basis.push(im);
        }
    }
    basis
}

/// Real coordinates of a Hermitian operator in `hermitian_basis(n)`.
pub fn hermitian_coordinates(h: &Operator) -> Vec<f64> {
    hermitian_basis(h.rows()).iter().map(|b| b.inner(h).re).collect()
}
