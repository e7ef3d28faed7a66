use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse real symmetric matrix stored as upper-triangular triplets.
///
/// `(r, c, v)` with `r <= c` stands for `v` at both `(r, c)` and `(c, r)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SymMatrix {
    pub fn new(n: usize) -> Self {
        SymMatrix { n, entries: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix { n, entries: (0..n).map(|i| (i, i, 1.0)).collect() }
    }

    /// Adds `v` at `(r, c)` and its mirror.
    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        assert!(r < self.n && c < self.n, "entry ({r},{c}) outside {}x{}", self.n, self.n);
        if v != 0.0 {
            let (r, c) = if r <= c { (r, c) } else { (c, r) };
            self.entries.push((r, c, v));
        }
    }

    pub fn with(mut self, r: usize, c: usize, v: f64) -> Self {
        self.push(r, c, v);
        self
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.entries.iter_mut().for_each(|e| e.2 *= s);
        self
    }

    /// Upper triangle of a dense matrix; fails if it is not symmetric within `tol`.
    pub fn from_dense(m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::dims("symmetric block must be square"));
        }
        let n = m.nrows();
        let mut out = SymMatrix::new(n);
        for r in 0..n {
            for c in r..n {
                if (m[(r, c)] - m[(c, r)]).abs() > tol {
                    return Err(Error::invariant(
                        "symmetric constraint matrix",
                        format!("entry ({r},{c}) differs from its mirror by {:.3e}", m[(r, c)] - m[(c, r)]),
                    ));
                }
                let v = 0.5 * (m[(r, c)] + m[(c, r)]);
                out.push(r, c, v);
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
            if r != c {
                m[(c, r)] += v;
            }
        }
        m
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.entries.iter().filter(|e| e.0 == e.1).map(|e| e.2).sum()
    }

    /// Entries with both triangles spelled out, duplicates merged.
    pub(crate) fn expanded(&self) -> Vec<(usize, usize, f64)> {
        let mut acc: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
        for &(r, c, v) in &self.entries {
            *acc.entry((r, c)).or_default() += v;
            if r != c {
                *acc.entry((c, r)).or_default() += v;
            }
        }
        acc.into_iter().filter(|(_, v)| *v != 0.0).map(|((r, c), v)| (r, c, v)).collect()
    }
}

/// One linear equality `Σ_b ⟨A_b, X_b⟩ = rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    /// `(block index, A_b)`; blocks not listed contribute zero.
    pub terms: Vec<(usize, SymMatrix)>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(rhs: f64) -> Self {
        Constraint { terms: Vec::new(), rhs }
    }

    pub fn term(mut self, block: usize, a: SymMatrix) -> Self {
        self.terms.push((block, a));
        self
    }
}

/// Block-diagonal SDP in primal standard form:
///
/// ```text
/// minimize   Σ_b ⟨C_b, X_b⟩
/// subject to Σ_b ⟨A_ib, X_b⟩ = b_i,   X_b ⪰ 0
/// ```
///
/// with dual `maximize bᵀy  s.t.  Z_b = C_b − Σ_i y_i A_ib ⪰ 0`.
/// A block of side 1 is a nonnegative scalar.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub objective: Vec<SymMatrix>,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>) -> Self {
        let objective = blocks.iter().map(|&n| SymMatrix::new(n)).collect();
        SdpProblem { blocks, objective, constraints: Vec::new() }
    }

    pub fn add_block(&mut self, n: usize) -> usize {
        self.blocks.push(n);
        self.objective.push(SymMatrix::new(n));
        self.blocks.len() - 1
    }

    pub fn set_objective(&mut self, block: usize, c: SymMatrix) {
        self.objective[block] = c;
    }

    pub fn push(&mut self, constraint: Constraint) {
        self.constraints.push(constraint);
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn has_objective(&self) -> bool {
        self.objective.iter().any(|c| c.entries.iter().any(|e| e.2 != 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() || self.blocks.contains(&0) {
            return Err(Error::invariant("positive block sizes", format!("{:?}", self.blocks)));
        }
        if self.objective.len() != self.blocks.len() {
            return Err(Error::LengthMismatch { expected: self.blocks.len(), got: self.objective.len() });
        }
        for (b, c) in self.objective.iter().enumerate() {
            check_sym(c, self.blocks[b])?;
        }
        if self.constraints.len() > self.total_dim().pow(2) {
            return Err(Error::invariant(
                "constraint count bounded by matrix dimension squared",
                format!("{} constraints for total dimension {}", self.constraints.len(), self.total_dim()),
            ));
        }
        for con in &self.constraints {
            if !con.rhs.is_finite() {
                return Err(Error::NonFinite);
            }
            for (b, a) in &con.terms {
                let n = *self
                    .blocks
                    .get(*b)
                    .ok_or_else(|| Error::dims(format!("constraint references missing block {b}")))?;
                check_sym(a, n)?;
            }
        }
        Ok(())
    }

    /// Objective value at a given primal point.
    pub fn primal_objective(&self, x: &[DMatrix<f64>]) -> f64 {
        self.objective.iter().zip(x).map(|(c, xb)| sym_inner(c, xb)).sum()
    }

    /// `b − 𝒜(X)` for every constraint.
    pub fn primal_residual(&self, x: &[DMatrix<f64>]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|con| con.rhs - con.terms.iter().map(|(b, a)| sym_inner(a, &x[*b])).sum::<f64>())
            .collect()
    }

    /// `Σ_i y_i A_i` per block.
    pub fn adjoint_map(&self, y: &[f64]) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (con, &yi) in self.constraints.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for (b, a) in &con.terms {
                for &(r, c, v) in &a.entries {
                    out[*b][(r, c)] += yi * v;
                    if r != c {
                        out[*b][(c, r)] += yi * v;
                    }
                }
            }
        }
        out
    }
}

fn check_sym(m: &SymMatrix, n: usize) -> Result<()> {
    if m.n != n {
        return Err(Error::dims(format!("symmetric block of side {} placed in block of side {n}", m.n)));
    }
    for &(r, c, v) in &m.entries {
        if r > c || c >= n {
            return Err(Error::dims(format!("triplet ({r},{c}) invalid for side {n}")));
        }
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
    }
    Ok(())
}

/// ⟨A, X⟩ for sparse symmetric A and dense X.
pub fn sym_inner(a: &SymMatrix, x: &DMatrix<f64>) -> f64 {
    a.entries
        .iter()
        .map(|&(r, c, v)| if r == c { v * x[(r, c)] } else { v * (x[(r, c)] + x[(c, r)]) })
        .sum()
}

/// Solver outcome classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

/// Certificate that `{X ⪰ 0 : 𝒜(X) = b}` is empty: `Σ y_i A_i ⪯ −εI` while
/// `bᵀy > 0`. Any feasible X would give `0 < bᵀy = ⟨Σ y_i A_i, X⟩ ≤ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    pub y: Vec<f64>,
    /// `−λ_max(Σ y_i A_i)`, recomputed from `y`.
    pub epsilon: f64,
    pub b_dot_y: f64,
}

impl FarkasCertificate {
    /// Recompute ε and bᵀy from scratch for `y` against `p`.
    pub fn evaluate(p: &SdpProblem, y: Vec<f64>) -> Self {
        let agg = p.adjoint_map(&y);
        let lmax = agg
            .iter()
            .map(|m| m.clone().symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .fold(f64::NEG_INFINITY, f64::max);
        let b_dot_y = p.constraints.iter().zip(&y).map(|(c, yi)| c.rhs * yi).sum();
        FarkasCertificate { y, epsilon: -lmax, b_dot_y }
    }

    pub fn is_valid(&self, min_epsilon: f64) -> bool {
        self.epsilon >= min_epsilon && self.b_dot_y > 0.0
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<DMatrix<f64>>,
    pub y: Vec<f64>,
    pub z: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// |primal objective − dual objective|
    pub gap: f64,
    /// ⟨X, Z⟩
    pub complementarity: f64,
    /// (‖b − 𝒜(X)‖₂, ‖C − Z − 𝒜*(y)‖_F)
    pub residuals: (f64, f64),
    pub iterations: usize,
    pub farkas: Option<FarkasCertificate>,
}

impl SdpSolution {
    pub fn min_eigenvalues(&self) -> (f64, f64) {
        let min = |ms: &[DMatrix<f64>]| {
            ms.iter()
                .map(|m| m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min))
                .fold(f64::INFINITY, f64::min)
        };
        (min(&self.x), min(&self.z))
    }
}

/// Compact diagnostics carried into verdicts and CLI output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub status: SdpStatus,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

impl From<&SdpSolution> for SolverDiagnostics {
    fn from(s: &SdpSolution) -> Self {
        SolverDiagnostics {
            status: s.status,
            gap: s.gap,
            primal_residual: s.residuals.0,
            dual_residual: s.residuals.1,
            iterations: s.iterations,
        }
    }
}
