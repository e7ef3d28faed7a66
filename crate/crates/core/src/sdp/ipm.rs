//! Infeasible-start primal–dual interior-point method with HKM search
//! direction and Mehrotra predictor–corrector steps.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::problem::{Constraint, FarkasCertificate, SdpProblem, SdpSolution, SdpStatus, SymMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Target for relative gap and relative residuals.
    pub tolerance: f64,
    /// Relative pivot threshold for dropping dependent constraints.
    pub reduction_tolerance: f64,
}

const BUILTIN_TOLERANCE: f64 = 1e-10;
static DEFAULT_TOLERANCE: AtomicU64 = AtomicU64::new(0);

/// Process-wide override of the convergence target used by
/// `SolverOptions::default()`; `None` restores 1e-10.
pub fn set_default_tolerance(tol: Option<f64>) {
    DEFAULT_TOLERANCE.store(tol.map_or(0, f64::to_bits), Ordering::Relaxed);
}

fn default_tolerance() -> f64 {
    match DEFAULT_TOLERANCE.load(Ordering::Relaxed) {
        0 => BUILTIN_TOLERANCE,
        bits => f64::from_bits(bits),
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iterations: 200, tolerance: default_tolerance(), reduction_tolerance: 1e-10 }
    }
}

/// Absolute acceptance bounds attached to an `Optimal` status.
const OPTIMAL_GAP: f64 = 1e-7;
const OPTIMAL_RESIDUAL: f64 = 1e-7;
/// Phase-I decision threshold on the optimal shift t.
pub const FEASIBILITY_SHIFT: f64 = 1e-8;

type Entries = Vec<(usize, usize, f64)>;

struct Row {
    terms: Vec<(usize, Entries)>,
    rhs: f64,
}

struct Prepared {
    blocks: Vec<usize>,
    c: Vec<DMatrix<f64>>,
    rows: Vec<Row>,
    /// For each block, the `(row, term)` pairs that touch it.
    touch: Vec<Vec<(usize, usize)>>,
}

impl Prepared {
    fn new(p: &SdpProblem, kept: &[usize]) -> Self {
        let rows: Vec<Row> = kept
            .iter()
            .map(|&i| {
                let con = &p.constraints[i];
                let mut merged: Vec<(usize, SymMatrix)> = Vec::new();
                for (b, a) in &con.terms {
                    match merged.iter_mut().find(|(mb, _)| mb == b) {
                        Some((_, m)) => m.entries.extend_from_slice(&a.entries),
                        None => merged.push((*b, a.clone())),
                    }
                }
                Row {
                    terms: merged
                        .into_iter()
                        .map(|(b, a)| (b, a.expanded()))
                        .filter(|(_, e)| !e.is_empty())
                        .collect(),
                    rhs: con.rhs,
                }
            })
            .collect();
        let mut touch = vec![Vec::new(); p.blocks.len()];
        for (i, row) in rows.iter().enumerate() {
            for (t, (b, _)) in row.terms.iter().enumerate() {
                touch[*b].push((i, t));
            }
        }
        Prepared { blocks: p.blocks.clone(), c: p.objective.iter().map(SymMatrix::to_dense).collect(), rows, touch }
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn ntot(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Tr(A_i Y) for arbitrary (possibly nonsymmetric) Y.
    fn apply_row(&self, i: usize, y: &[DMatrix<f64>]) -> f64 {
        self.rows[i]
            .terms
            .iter()
            .map(|(b, e)| e.iter().map(|&(r, c, v)| v * y[*b][(c, r)]).sum::<f64>())
            .sum()
    }

    fn apply(&self, y: &[DMatrix<f64>]) -> Vec<f64> {
        (0..self.m()).map(|i| self.apply_row(i, y)).collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<DMatrix<f64>> {
        let mut out = zeros_like(&self.blocks);
        for (row, &yi) in self.rows.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for (b, e) in &row.terms {
                for &(r, c, v) in e {
                    out[*b][(r, c)] += yi * v;
                }
            }
        }
        out
    }

    fn schur(&self, x: &[DMatrix<f64>], zinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.m();
        let mut s = DMatrix::zeros(m, m);
        for (b, list) in self.touch.iter().enumerate() {
            let n = self.blocks[b];
            let (xb, zb) = (&x[b], &zinv[b]);
            let mut g = DMatrix::<f64>::zeros(n, n);
            for (ii, &(i, ti)) in list.iter().enumerate() {
                g.fill(0.0);
                // G = X A_i Z⁻¹ = Σ v X[:,r] Z⁻¹[c,:]
                for &(r, c, v) in &self.rows[i].terms[ti].1 {
                    for q in 0..n {
                        let zq = v * zb[(c, q)];
                        if zq == 0.0 {
                            continue;
                        }
                        let col = xb.column(r);
                        let mut gq = g.column_mut(q);
                        gq.axpy(zq, &col, 1.0);
                    }
                }
                for &(j, tj) in &list[ii..] {
                    let val: f64 = self.rows[j].terms[tj].1.iter().map(|&(r, c, w)| w * g[(c, r)]).sum();
                    s[(i, j)] += val;
                    if i != j {
                        s[(j, i)] += val;
                    }
                }
            }
        }
        s
    }
}

fn zeros_like(blocks: &[usize]) -> Vec<DMatrix<f64>> {
    blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect()
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn fro(a: &[DMatrix<f64>]) -> f64 {
    a.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest α with `x + α dx ⪰ 0` (∞ when dx keeps x in the cone).
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    if x.nrows() == 1 {
        return if dx[(0, 0)] < 0.0 { -x[(0, 0)] / dx[(0, 0)] } else { f64::INFINITY };
    }
    let Some(chol) = Cholesky::new(x.clone()) else { return 0.0 };
    let l = chol.l();
    let Some(w) = l.solve_lower_triangular(dx) else { return 0.0 };
    let Some(s) = l.solve_lower_triangular(&w.transpose()) else { return 0.0 };
    let lmin = symmetrize(&s).symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn inverse_pd(z: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    Cholesky::new(z.clone()).map(|c| symmetrize(&c.inverse()))
}

enum NewtonFactor {
    Chol(Cholesky<f64, Dyn>),
    Lu(nalgebra::LU<f64, Dyn, Dyn>),
}

impl NewtonFactor {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(rhs);
        match self {
            NewtonFactor::Chol(c) => c.solve(&v).iter().copied().collect(),
            NewtonFactor::Lu(lu) => lu.solve(&v).map(|s| s.iter().copied().collect()).unwrap_or_else(|| vec![0.0; rhs.len()]),
        }
    }
}

fn factor_newton(m: &DMatrix<f64>) -> Result<NewtonFactor> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok(NewtonFactor::Chol(c));
    }
    let dmax = (0..m.nrows()).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    for k in [1e-14, 1e-12, 1e-10, 1e-8] {
        let mut reg = m.clone();
        for i in 0..m.nrows() {
            reg[(i, i)] += k * dmax;
        }
        if let Some(c) = Cholesky::new(reg) {
            return Ok(NewtonFactor::Chol(c));
        }
    }
    let lu = m.clone().lu();
    if lu.is_invertible() {
        return Ok(NewtonFactor::Lu(lu));
    }
    let ev = symmetrize(m).symmetric_eigenvalues();
    let hi = ev.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let lo = ev.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    Err(Error::SingularNewton { condition: if lo > 0.0 { hi / lo } else { f64::INFINITY } })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Exit {
    Converged,
    MaxIterations,
    Stalled,
    Diverged,
}

struct Iterate {
    x: Vec<DMatrix<f64>>,
    y: Vec<f64>,
    z: Vec<DMatrix<f64>>,
}

struct IpmOutcome {
    exit: Exit,
    it: Iterate,
    iterations: usize,
}

struct Measures {
    compl: f64,
    rp: Vec<f64>,
    rd: Vec<DMatrix<f64>>,
    merit: f64,
}

fn measures(pp: &Prepared, it: &Iterate, bnorm: f64, cnorm: f64) -> Measures {
    let pobj = inner(&pp.c, &it.x);
    let dobj: f64 = pp.rows.iter().zip(&it.y).map(|(r, y)| r.rhs * y).sum();
    let ax = pp.apply(&it.x);
    let rp: Vec<f64> = pp.rows.iter().zip(&ax).map(|(r, a)| r.rhs - a).collect();
    let aty = pp.adjoint(&it.y);
    let rd: Vec<DMatrix<f64>> = pp.c.iter().zip(&it.z).zip(&aty).map(|((c, z), a)| c - z - a).collect();
    let compl = inner(&it.x, &it.z);
    let scale = 1.0 + pobj.abs() + dobj.abs();
    let merit = [
        (pobj - dobj).abs() / scale,
        compl / scale,
        norm2(&rp) / (1.0 + bnorm),
        fro(&rd) / (1.0 + cnorm),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Measures { compl, rp, rd, merit }
}

fn ipm(pp: &Prepared, opts: &SolverOptions) -> Result<IpmOutcome> {
    let m = pp.m();
    let ntot = pp.ntot() as f64;
    let bnorm = norm2(&pp.rows.iter().map(|r| r.rhs).collect::<Vec<_>>());
    let cnorm = fro(&pp.c);

    // Starting point scaled per block, following the usual SDPT3 heuristics.
    let mut x = Vec::with_capacity(pp.blocks.len());
    let mut z = Vec::with_capacity(pp.blocks.len());
    for (b, &n) in pp.blocks.iter().enumerate() {
        let nf = n as f64;
        let mut xi: f64 = 10f64.max(nf.sqrt());
        let mut eta: f64 = 10f64.max(nf.sqrt()).max(pp.c[b].norm());
        for &(i, t) in &pp.touch[b] {
            let an = pp.rows[i].terms[t].1.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt();
            xi = xi.max(nf * (1.0 + pp.rows[i].rhs.abs()) / (1.0 + an));
            eta = eta.max(an);
        }
        x.push(DMatrix::identity(n, n) * xi);
        z.push(DMatrix::identity(n, n) * eta);
    }
    let mut it = Iterate { x, y: vec![0.0; m], z };
    let mut best: Option<(f64, Iterate)> = None;
    let mut iterations = 0;
    let mut exit = Exit::MaxIterations;

    for k in 0..opts.max_iterations {
        iterations = k;
        let ms = measures(pp, &it, bnorm, cnorm);
        if best.as_ref().is_none_or(|(bm, _)| ms.merit < *bm) {
            best = Some((ms.merit, Iterate { x: it.x.clone(), y: it.y.clone(), z: it.z.clone() }));
        }
        if ms.merit <= opts.tolerance {
            exit = Exit::Converged;
            break;
        }
        let xmax = it.x.iter().map(|b| b.amax()).fold(0.0, f64::max);
        let ymax = it.y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if xmax > 1e13 || ymax > 1e13 || !xmax.is_finite() || !ymax.is_finite() {
            exit = Exit::Diverged;
            break;
        }
        let mu = ms.compl / ntot;
        let Some(zinv) = it.z.iter().map(inverse_pd).collect::<Option<Vec<_>>>() else {
            exit = Exit::Stalled;
            break;
        };
        let schur = pp.schur(&it.x, &zinv);
        let factor = match factor_newton(&schur) {
            Ok(f) => f,
            Err(e) => {
                if best.as_ref().is_some_and(|(bm, _)| *bm < 1e-6) {
                    exit = Exit::Stalled;
                    break;
                }
                return Err(e);
            }
        };

        // X Rd Z⁻¹ is shared by predictor and corrector.
        let xrdz: Vec<DMatrix<f64>> =
            it.x.iter().zip(&ms.rd).zip(&zinv).map(|((xb, rb), zb)| xb * rb * zb).collect();
        let a_xrdz = pp.apply(&xrdz);

        let direction = |sigma_mu: f64, corr: Option<&[DMatrix<f64>]>| {
            let r: Vec<DMatrix<f64>> = it
                .x
                .iter()
                .zip(&zinv)
                .enumerate()
                .map(|(b, (xb, zb))| {
                    let mut r = zb * sigma_mu - xb;
                    if let Some(k) = corr {
                        r -= &k[b];
                    }
                    r
                })
                .collect();
            let ar = pp.apply(&r);
            let rhs: Vec<f64> = (0..m).map(|i| ms.rp[i] - ar[i] + a_xrdz[i]).collect();
            let dy = factor.solve(&rhs);
            let atdy = pp.adjoint(&dy);
            let dz: Vec<DMatrix<f64>> = ms.rd.iter().zip(&atdy).map(|(rd, a)| rd - a).collect();
            let dx: Vec<DMatrix<f64>> = r
                .iter()
                .zip(&it.x)
                .zip(&dz)
                .zip(&zinv)
                .map(|(((rb, xb), dzb), zb)| symmetrize(&(rb - xb * dzb * zb)))
                .collect();
            (dx, dy, dz)
        };
        let steps = |dx: &[DMatrix<f64>], dz: &[DMatrix<f64>]| {
            let ap = it.x.iter().zip(dx).map(|(a, d)| max_step(a, d)).fold(f64::INFINITY, f64::min);
            let ad = it.z.iter().zip(dz).map(|(a, d)| max_step(a, d)).fold(f64::INFINITY, f64::min);
            (ap, ad)
        };

        let (dxa, _, dza) = direction(0.0, None);
        let (ap_a, ad_a) = steps(&dxa, &dza);
        let (ap_a, ad_a) = (ap_a.min(1.0), ad_a.min(1.0));
        let x_aff: Vec<DMatrix<f64>> = it.x.iter().zip(&dxa).map(|(a, d)| a + d * ap_a).collect();
        let z_aff: Vec<DMatrix<f64>> = it.z.iter().zip(&dza).map(|(a, d)| a + d * ad_a).collect();
        let mu_aff = inner(&x_aff, &z_aff) / ntot;
        let sigma = if mu > 0.0 { (mu_aff / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };
        let corr: Vec<DMatrix<f64>> = dxa.iter().zip(&dza).zip(&zinv).map(|((a, b), c)| a * b * c).collect();

        let (dx, dy, dz) = direction(sigma * mu, Some(&corr));
        let (ap, ad) = steps(&dx, &dz);
        let gamma = 0.9 + 0.09 * ap_a.min(ad_a);
        let (ap, ad) = ((gamma * ap).min(1.0), (gamma * ad).min(1.0));
        if ap < 1e-12 && ad < 1e-12 {
            exit = Exit::Stalled;
            break;
        }
        for b in 0..pp.blocks.len() {
            it.x[b] += &dx[b] * ap;
            it.x[b] = symmetrize(&it.x[b]);
            it.z[b] += &dz[b] * ad;
            it.z[b] = symmetrize(&it.z[b]);
        }
        for (yi, d) in it.y.iter_mut().zip(&dy) {
            *yi += ad * d;
        }
        iterations = k + 1;
    }
    if exit != Exit::Converged {
        let ms = measures(pp, &it, bnorm, cnorm);
        if let Some((bm, b)) = best {
            if bm < ms.merit {
                it = b;
            }
        }
    }
    Ok(IpmOutcome { exit, it, iterations })
}

/// Result of dependent-row elimination.
struct Reduction {
    kept: Vec<usize>,
    /// A combination `y` of original rows with `Σ y_i A_i ≈ 0` and `bᵀy > 0`.
    inconsistent: Option<Vec<f64>>,
}

/// Pivoted modified Gram–Schmidt on the constraint rows in svec coordinates
/// (√2-weighted off-diagonals), equivalent to QR with column pivoting on 𝒜ᵀ.
fn reduce(p: &SdpProblem, tol: f64) -> Reduction {
    let m = p.constraints.len();
    let mut offsets = Vec::with_capacity(p.blocks.len());
    let mut total = 0;
    for &n in &p.blocks {
        offsets.push(total);
        total += n * (n + 1) / 2;
    }
    let s2 = std::f64::consts::SQRT_2;
    let mut rows: Vec<Vec<f64>> = p
        .constraints
        .iter()
        .map(|con| {
            let mut v = vec![0.0; total];
            for (b, a) in &con.terms {
                let n = p.blocks[*b];
                for &(r, c, val) in &a.entries {
                    let idx = offsets[*b] + r * n - r * (r + 1) / 2 + c;
                    v[idx] += if r == c { val } else { s2 * val };
                }
            }
            v
        })
        .collect();
    let mut beta: Vec<f64> = p.constraints.iter().map(|c| c.rhs).collect();
    let mut coef: Vec<Vec<f64>> = (0..m).map(|i| { let mut e = vec![0.0; m]; e[i] = 1.0; e }).collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = rows.iter().map(|r| norm(r)).fold(0.0, f64::max);
    let mut remaining: Vec<usize> = (0..m).collect();
    let mut kept = Vec::new();
    let mut norms: Vec<f64> = rows.iter().map(|r| norm(r)).collect();
    while !remaining.is_empty() {
        let (pos, &j) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| norms[*a.1].total_cmp(&norms[*b.1]))
            .unwrap();
        if norms[j] <= tol * scale.max(1e-300) {
            break;
        }
        remaining.swap_remove(pos);
        let nj = norm(&rows[j]);
        let inv = 1.0 / nj;
        rows[j].iter_mut().for_each(|x| *x *= inv);
        beta[j] *= inv;
        coef[j].iter_mut().for_each(|x| *x *= inv);
        let (qj, bj, cj) = (rows[j].clone(), beta[j], coef[j].clone());
        for &k in &remaining {
            let proj: f64 = rows[k].iter().zip(&qj).map(|(a, b)| a * b).sum();
            if proj != 0.0 {
                rows[k].iter_mut().zip(&qj).for_each(|(a, b)| *a -= proj * b);
                beta[k] -= proj * bj;
                coef[k].iter_mut().zip(&cj).for_each(|(a, b)| *a -= proj * b);
            }
            norms[k] = norm(&rows[k]);
        }
        kept.push(j);
    }
    kept.sort_unstable();
    let bscale = 1.0 + beta.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let inconsistent = remaining
        .iter()
        .filter(|&&k| beta[k].abs() > 1e-8 * bscale)
        .max_by(|a, b| beta[**a].abs().total_cmp(&beta[**b].abs()))
        .map(|&k| {
            let sign = beta[k].signum();
            coef[k].iter().map(|c| c * sign).collect()
        });
    Reduction { kept, inconsistent }
}

fn expand_y(kept: &[usize], y: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for (&i, &v) in kept.iter().zip(y) {
        out[i] = v;
    }
    out
}

/// Solve a block SDP. Reports `Optimal` only when the absolute gap and both
/// residuals are within 1e-7; an unsuccessful run is classified by a phase-I
/// feasibility check, which yields a Farkas certificate when the problem is
/// infeasible.
pub fn solve(p: &SdpProblem) -> Result<SdpSolution> {
    solve_with(p, &SolverOptions::default())
}

pub fn solve_with(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    p.validate()?;
    let m = p.constraints.len();
    let red = reduce(p, opts.reduction_tolerance);
    if let Some(y) = red.inconsistent {
        return Ok(infeasible_solution(p, FarkasCertificate::evaluate(p, y)));
    }
    let pp = Prepared::new(p, &red.kept);
    let outcome = match ipm(&pp, opts) {
        Ok(o) => o,
        Err(e @ Error::SingularNewton { .. }) => {
            return match feasibility(p, opts)? {
                Phase1 { outcome: FeasibilityOutcome::Infeasible(cert), .. } => Ok(infeasible_solution(p, cert)),
                _ => Err(e),
            };
        }
        Err(e) => return Err(e),
    };
    let sol = finish(p, &red.kept, outcome, m);
    if sol.status == SdpStatus::Optimal {
        return Ok(sol);
    }
    match feasibility(p, opts)? {
        Phase1 { outcome: FeasibilityOutcome::Infeasible(cert), .. } => Ok(infeasible_solution(p, cert)),
        _ => Ok(sol),
    }
}

fn finish(p: &SdpProblem, kept: &[usize], out: IpmOutcome, m: usize) -> SdpSolution {
    let y = expand_y(kept, &out.it.y, m);
    let rp = p.primal_residual(&out.it.x);
    let aty = p.adjoint_map(&y);
    let rd: Vec<DMatrix<f64>> = p
        .objective
        .iter()
        .zip(&out.it.z)
        .zip(&aty)
        .map(|((c, z), a)| c.to_dense() - z - a)
        .collect();
    let pobj = p.primal_objective(&out.it.x);
    let dobj: f64 = p.constraints.iter().zip(&y).map(|(c, yi)| c.rhs * yi).sum();
    let compl = inner(&out.it.x, &out.it.z);
    let residuals = (norm2(&rp), fro(&rd));
    let gap = (pobj - dobj).abs();
    let scale = 1.0 + pobj.abs();
    let ok = gap <= OPTIMAL_GAP * scale.max(1.0)
        && compl <= OPTIMAL_GAP * scale
        && residuals.0 <= OPTIMAL_RESIDUAL
        && residuals.1 <= OPTIMAL_RESIDUAL;
    let status = if ok { SdpStatus::Optimal } else { SdpStatus::MaxIterations };
    SdpSolution {
        status,
        x: out.it.x,
        y,
        z: out.it.z,
        primal_objective: pobj,
        dual_objective: dobj,
        gap,
        complementarity: compl,
        residuals,
        iterations: out.iterations,
        farkas: None,
    }
}

fn infeasible_solution(p: &SdpProblem, cert: FarkasCertificate) -> SdpSolution {
    SdpSolution {
        status: SdpStatus::Infeasible,
        x: zeros_like(&p.blocks),
        y: cert.y.clone(),
        z: zeros_like(&p.blocks),
        primal_objective: f64::NAN,
        dual_objective: cert.b_dot_y,
        gap: f64::NAN,
        complementarity: f64::NAN,
        residuals: (f64::NAN, f64::NAN),
        iterations: 0,
        farkas: Some(cert),
    }
}

#[derive(Clone, Debug)]
pub enum FeasibilityOutcome {
    /// A point with `𝒜(X) ≈ b` and `X ⪰ −1e-8·I`.
    Feasible(Vec<DMatrix<f64>>),
    Infeasible(FarkasCertificate),
}

/// Outcome of `check_feasible`.
#[derive(Clone, Debug)]
pub struct Phase1 {
    pub outcome: FeasibilityOutcome,
    /// Optimal phase-I shift `t*` (feasible iff `t* < 1e-8`).
    pub shift: f64,
    pub iterations: usize,
    pub max_violation: f64,
}

impl Phase1 {
    pub fn is_feasible(&self) -> bool {
        matches!(self.outcome, FeasibilityOutcome::Feasible(_))
    }
}

/// Decide `{X ⪰ 0 : 𝒜(X) = b}` by phase-I: minimize `t` such that
/// `X + tI ⪰ 0`. The objective of `p` must be zero.
pub fn check_feasible(p: &SdpProblem) -> Result<Phase1> {
    p.validate()?;
    if p.has_objective() {
        return Err(Error::invariant("pure feasibility problem", "objective must be zero"));
    }
    feasibility(p, &SolverOptions::default())
}

fn feasibility(p: &SdpProblem, opts: &SolverOptions) -> Result<Phase1> {
    let red = reduce(p, opts.reduction_tolerance);
    if let Some(y) = red.inconsistent {
        let cert = strengthen(p, &red.kept, opts).unwrap_or_else(|| FarkasCertificate::evaluate(p, y));
        return Ok(Phase1 { outcome: FeasibilityOutcome::Infeasible(cert), shift: f64::INFINITY, iterations: 0, max_violation: f64::NAN });
    }
    let nb = p.blocks.len();
    let ntot = p.total_dim() as f64;
    let shift_floor = 1.0;
    let bmax = p.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
    let mut bound = 1e2 * (1.0 + ntot) * (1.0 + bmax);
    let traces: Vec<f64> =
        p.constraints.iter().map(|c| c.terms.iter().map(|(_, a)| a.trace()).sum()).collect();

    for _attempt in 0..4 {
        let mut q = SdpProblem::new(p.blocks.clone());
        let s_idx = q.add_block(1);
        let r_idx = q.add_block(1);
        q.set_objective(s_idx, SymMatrix::identity(1));
        for &i in &red.kept {
            let con = &p.constraints[i];
            let mut row = Constraint { terms: con.terms.clone(), rhs: con.rhs - shift_floor * traces[i] };
            if traces[i] != 0.0 {
                row.terms.push((s_idx, SymMatrix::new(1).with(0, 0, -traces[i])));
            }
            q.push(row);
        }
        let mut tr = Constraint::new(bound);
        for (b, &n) in p.blocks.iter().enumerate() {
            tr = tr.term(b, SymMatrix::identity(n));
        }
        q.push(tr.term(r_idx, SymMatrix::identity(1)));

        let all: Vec<usize> = (0..q.constraints.len()).collect();
        let pp = Prepared::new(&q, &all);
        let out = ipm(&pp, opts)?;
        let s = out.it.x[s_idx][(0, 0)];
        let r = out.it.x[r_idx][(0, 0)];
        let t = s - shift_floor;
        if out.exit != Exit::Converged && measures_ok(&q, &out).is_none() {
            return Err(Error::Solver {
                status: SdpStatus::MaxIterations,
                detail: format!("phase-I did not converge ({:?}) after {} iterations", out.exit, out.iterations),
            });
        }
        if t < FEASIBILITY_SHIFT {
            let x: Vec<DMatrix<f64>> = (0..nb)
                .map(|b| symmetrize(&(&out.it.x[b] - DMatrix::identity(p.blocks[b], p.blocks[b]) * t)))
                .collect();
            let viol = norm2(&p.primal_residual(&x));
            return Ok(Phase1 { outcome: FeasibilityOutcome::Feasible(x), shift: t, iterations: out.iterations, max_violation: viol });
        }
        if r < 1e-6 * bound {
            bound *= 100.0;
            continue;
        }
        let fallback = FarkasCertificate::evaluate(p, expand_y(&red.kept, &out.it.y[..red.kept.len()], p.constraints.len()));
        let cert = match strengthen(p, &red.kept, opts) {
            Some(c) if c.b_dot_y > 0.0 && c.epsilon >= fallback.epsilon.min(0.0) => c,
            _ => fallback,
        };
        return Ok(Phase1 { outcome: FeasibilityOutcome::Infeasible(cert), shift: t, iterations: out.iterations, max_violation: f64::NAN });
    }
    Err(Error::Solver {
        status: SdpStatus::MaxIterations,
        detail: "phase-I trace bound kept binding; feasible set appears unbounded in trace".into(),
    })
}

/// Accept a non-converged phase-I run when it is still accurate enough to decide.
fn measures_ok(q: &SdpProblem, out: &IpmOutcome) -> Option<()> {
    let rp = norm2(&q.primal_residual(&out.it.x));
    (rp < 1e-7).then_some(())
}

/// Look for a strict Farkas witness: maximize ε subject to
/// `Σ y_i A_i + εI ⪯ 0`, `bᵀy ≥ 1`, `ε ≤ 1`, written as the dual of a
/// standard-form problem.
fn strengthen(p: &SdpProblem, kept: &[usize], opts: &SolverOptions) -> Option<FarkasCertificate> {
    let mut q = SdpProblem::new(p.blocks.clone());
    let p_idx = q.add_block(1);
    let q_idx = q.add_block(1);
    q.set_objective(p_idx, SymMatrix::new(1).with(0, 0, -1.0));
    q.set_objective(q_idx, SymMatrix::identity(1));
    for &i in kept {
        let con = &p.constraints[i];
        let mut row = Constraint { terms: con.terms.clone(), rhs: 0.0 };
        if con.rhs != 0.0 {
            row.terms.push((p_idx, SymMatrix::new(1).with(0, 0, -con.rhs)));
        }
        q.push(row);
    }
    let mut eps = Constraint::new(1.0);
    for (b, &n) in p.blocks.iter().enumerate() {
        eps = eps.term(b, SymMatrix::identity(n));
    }
    q.push(eps.term(q_idx, SymMatrix::identity(1)));
    let all: Vec<usize> = (0..q.constraints.len()).collect();
    let pp = Prepared::new(&q, &all);
    let out = ipm(&pp, opts).ok()?;
    let y = expand_y(kept, &out.it.y[..kept.len()], p.constraints.len());
    Some(FarkasCertificate::evaluate(p, y))
}
