//! Steering programs over deterministic strategies.
//!
//! Each member `X_λ` is a complex Hermitian block lowered to a real symmetric
//! `2n × 2n` block; equality of Hermitian operators is imposed coordinate-wise
//! in an orthonormal Hermitian basis, which keeps the row count at `n²` per
//! member.

use serde::{Deserialize, Serialize};

use super::assemblage::StateAssemblage;
use super::strategies::DeterministicStrategySet;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, max_eigenvalue, min_eigenvalue, Operator};
use crate::par::{self, Execution};
use crate::sdp::{
    self, embed_sparse, extract_complex, hermitian_basis, Constraint, FeasibilityOutcome, SdpProblem, SdpSolution,
    SdpStatus, SolverDiagnostics, SymMatrix,
};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Feasibility,
    Robustness,
    Weight,
}

/// Steering functional `Σ_{a,x} Tr(F_{a|x} ρ_{a|x})` with `F ⪰ 0`, normalized
/// so that every unsteerable assemblage scores at most `bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// `[x][a]`
    pub operators: Vec<Vec<Operator>>,
    /// Value on the assemblage that produced the witness.
    pub value: f64,
    /// `max_λ λ_max(Σ_{a,x} D_λ(a|x) F_{a|x})`, recomputed from the operators.
    pub bound: f64,
}

impl Witness {
    pub fn gap(&self) -> f64 {
        self.value - self.bound
    }

    pub fn evaluate(&self, sa: &StateAssemblage) -> f64 {
        functional(&self.operators, sa)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteeringVerdict {
    pub quantity: Quantity,
    pub steerable: bool,
    /// Quantifier value; for feasibility, the witness violation `value − bound`
    /// when steerable and 0 otherwise.
    pub value: f64,
    /// Set when the value falls in the tie band or the witness separates by
    /// less than the required gap.
    pub boundary: bool,
    /// `X_λ` with `Σ_λ D_λ(a|x) X_λ = ρ_{a|x}`.
    pub model: Option<Vec<Operator>>,
    pub witness: Option<Witness>,
    pub diagnostics: Option<SolverDiagnostics>,
}

fn functional(f: &[Vec<Operator>], sa: &StateAssemblage) -> f64 {
    f.iter()
        .zip(sa.members())
        .flat_map(|(fr, rr)| fr.iter().zip(rr))
        .map(|(fo, r)| fo.inner(r).re)
        .sum()
}

fn aggregate(f: &[Vec<Operator>], strategies: &DeterministicStrategySet, lambda: usize) -> Operator {
    (0..strategies.settings()).map(|x| f[x][strategies.response(lambda, x)].clone()).sum()
}

/// `max_λ λ_max(Σ_x F_{λ(x)|x})`.
pub fn unsteerable_bound(f: &[Vec<Operator>], strategies: &DeterministicStrategySet, exec: Execution) -> f64 {
    par::map_range(exec, strategies.len(), |l| max_eigenvalue(&aggregate(f, strategies, l)))
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest member-wise Frobenius error of a model.
pub fn model_error(model: &[Operator], sa: &StateAssemblage, strategies: &DeterministicStrategySet) -> f64 {
    let mut worst = 0.0f64;
    for x in 0..sa.settings() {
        for a in 0..sa.outcomes() {
            let rebuilt: Operator = (0..strategies.len())
                .filter(|&l| strategies.indicator(l, a, x))
                .map(|l| model[l].clone())
                .sum();
            worst = worst.max(rebuilt.distance(sa.member(a, x)));
        }
    }
    worst
}

fn model_is_valid(model: &[Operator], sa: &StateAssemblage, s: &DeterministicStrategySet) -> bool {
    model.iter().all(|x| min_eigenvalue(x) >= -tol::STEERING_BAND) && model_error(model, sa, s) <= tol::MODEL_REPRODUCTION
}

/// Turn Hermitian coefficients `G_{a|x}` whose functional beats its own
/// unsteerable bound into a normalized witness: `F = (G + γI)/(B + mγ)`.
fn normalize_witness(
    g: Vec<Vec<Operator>>,
    sa: &StateAssemblage,
    strategies: &DeterministicStrategySet,
    exec: Execution,
) -> Option<Witness> {
    let n = sa.dim();
    let m = sa.settings() as f64;
    let w = functional(&g, sa);
    let b = unsteerable_bound(&g, strategies, exec);
    if !(w > b) {
        return None;
    }
    let lmin = g.iter().flatten().map(min_eigenvalue).fold(f64::INFINITY, f64::min);
    let mut gamma = (-lmin).max(0.0);
    if b + m * gamma <= 0.0 {
        gamma = (-b / m) + (w - b) / m;
    }
    let denom = b + m * gamma;
    let id = Operator::identity(n);
    let f: Vec<Vec<Operator>> = g
        .iter()
        .map(|r| r.iter().map(|gi| (gi + &id.scale(gamma)).scale(1.0 / denom).hermitian_part()).collect())
        .collect();
    let bound = unsteerable_bound(&f, strategies, exec);
    let value = functional(&f, sa);
    Some(Witness { operators: f, value, bound })
}

fn witness_is_valid(w: &Witness) -> bool {
    w.operators.iter().flatten().all(|f| min_eigenvalue(f) >= -tol::PSD)
        && w.bound <= 1.0 + 1e-8
        && w.value - 1.0 >= tol::WITNESS_GAP
}

struct Layout {
    strategies: DeterministicStrategySet,
    n: usize,
    basis: Vec<Operator>,
    /// `(x, a)` pairs carrying constraints, in row order (each owns `n²` rows).
    rows: Vec<(usize, usize)>,
}

impl Layout {
    fn new(sa: &StateAssemblage, skip_redundant: bool) -> Result<Self> {
        let strategies = DeterministicStrategySet::new(sa.settings(), sa.outcomes())?;
        let n = sa.dim();
        let k = sa.outcomes();
        let rows = (0..sa.settings())
            .flat_map(|x| (0..k).map(move |a| (x, a)))
            .filter(|&(x, a)| !(skip_redundant && x > 0 && a == k - 1))
            .collect();
        Ok(Layout { strategies, n, basis: hermitian_basis(n), rows })
    }

    /// Rows `Σ_{λ(x)=a} Tr(H X_λ) + sign·Tr(H S_{a|x}) = Tr(H ρ_{a|x})`, with
    /// slack blocks numbered after the strategy blocks.
    fn constraints(&self, sa: &StateAssemblage, slack_sign: Option<f64>) -> Vec<Constraint> {
        let k = sa.outcomes();
        let nl = self.strategies.len();
        let mut out = Vec::with_capacity(self.rows.len() * self.basis.len());
        for &(x, a) in &self.rows {
            let lambdas: Vec<usize> = (0..nl).filter(|&l| self.strategies.indicator(l, a, x)).collect();
            for h in &self.basis {
                let ah = embed_sparse(h, 0.5);
                let mut con = Constraint::new(h.inner(sa.member(a, x)).re);
                for &l in &lambdas {
                    con = con.term(l, ah.clone());
                }
                if let Some(sign) = slack_sign {
                    con = con.term(nl + x * k + a, embed_sparse(h, 0.5 * sign));
                }
                out.push(con);
            }
        }
        out
    }

    /// `G_{a|x} = Σ_k y_{(x,a),k} H_k`, zero on rows that were skipped.
    fn coefficients(&self, y: &[f64], sa: &StateAssemblage) -> Vec<Vec<Operator>> {
        let nb = self.basis.len();
        let mut g = vec![vec![Operator::zeros(self.n, self.n); sa.outcomes()]; sa.settings()];
        for (r, &(x, a)) in self.rows.iter().enumerate() {
            g[x][a] = self.basis.iter().zip(&y[r * nb..(r + 1) * nb]).map(|(h, &yi)| h.scale(yi)).sum();
        }
        g
    }

    fn model(&self, x: &[nalgebra::DMatrix<f64>]) -> Vec<Operator> {
        (0..self.strategies.len()).map(|l| extract_complex(&x[l])).collect()
    }
}

fn solver_error(sol: &SdpSolution, what: &str) -> Error {
    Error::Solver {
        status: sol.status,
        detail: format!(
            "{what}: gap {:.3e}, residuals ({:.3e}, {:.3e}) after {} iterations",
            sol.gap, sol.residuals.0, sol.residuals.1, sol.iterations
        ),
    }
}

/// Decide whether `ρ_{a|x} = Σ_λ D_λ(a|x) X_λ` for some `X_λ ⪰ 0`, returning
/// a verified model or a verified witness.
pub fn test_unsteerable(sa: &StateAssemblage) -> Result<SteeringVerdict> {
    test_unsteerable_with(sa, Execution::Sequential)
}

pub fn test_unsteerable_with(sa: &StateAssemblage, exec: Execution) -> Result<SteeringVerdict> {
    on_support(sa, exec, feasibility_program)
}

fn feasibility_program(sa: &StateAssemblage, exec: Execution) -> Result<SteeringVerdict> {
    let layout = Layout::new(sa, true)?;
    let nl = layout.strategies.len();
    let mut p = SdpProblem::new(vec![2 * layout.n; nl]);
    for c in layout.constraints(sa, None) {
        p.push(c);
    }
    let phase1 = match sdp::check_feasible(&p) {
        Ok(r) => r,
        Err(e) if e.is_solver_failure() => return feasibility_via_robustness(sa, exec),
        Err(e) => return Err(e),
    };
    let diagnostics = Some(SolverDiagnostics {
        status: if phase1.is_feasible() { SdpStatus::Optimal } else { SdpStatus::Infeasible },
        gap: phase1.shift,
        primal_residual: phase1.max_violation,
        dual_residual: f64::NAN,
        iterations: phase1.iterations,
    });
    match phase1.outcome {
        FeasibilityOutcome::Feasible(x) => {
            let model = layout.model(&x);
            if model_is_valid(&model, sa, &layout.strategies) {
                return Ok(SteeringVerdict {
                    quantity: Quantity::Feasibility,
                    steerable: false,
                    value: 0.0,
                    boundary: false,
                    model: Some(model),
                    witness: None,
                    diagnostics,
                });
            }
        }
        FeasibilityOutcome::Infeasible(cert) => {
            let g = layout.coefficients(&cert.y, sa);
            if let Some(w) = normalize_witness(g, sa, &layout.strategies, exec) {
                if witness_is_valid(&w) {
                    return Ok(SteeringVerdict {
                        quantity: Quantity::Feasibility,
                        steerable: true,
                        value: w.value - w.bound,
                        boundary: false,
                        model: None,
                        witness: Some(w),
                        diagnostics,
                    });
                }
            }
        }
    }
    feasibility_via_robustness(sa, exec)
}

/// Used when phase-I certifies neither a model nor a witness.
fn feasibility_via_robustness(sa: &StateAssemblage, exec: Execution) -> Result<SteeringVerdict> {
    let r = robustness_program(sa, exec)?;
    Ok(SteeringVerdict {
        quantity: Quantity::Feasibility,
        value: if r.steerable { r.witness.as_ref().map_or(r.value, |w| w.value - w.bound) } else { 0.0 },
        ..r
    })
}

/// `SR = min Σ_λ Tr X_λ − 1` subject to `Σ_λ D_λ(a|x) X_λ ⪰ ρ_{a|x}`.
pub fn steering_robustness(sa: &StateAssemblage) -> Result<SteeringVerdict> {
    steering_robustness_with(sa, Execution::Sequential)
}

pub fn steering_robustness_with(sa: &StateAssemblage, exec: Execution) -> Result<SteeringVerdict> {
    on_support(sa, exec, robustness_program)
}

fn robustness_program(sa: &StateAssemblage, exec: Execution) -> Result<SteeringVerdict> {
    let layout = Layout::new(sa, false)?;
    let (nl, n2) = (layout.strategies.len(), 2 * layout.n);
    let slacks = sa.settings() * sa.outcomes();
    let mut p = SdpProblem::new(vec![n2; nl + slacks]);
    for l in 0..nl {
        p.set_objective(l, SymMatrix::identity(n2).scaled(0.5));
    }
    for c in layout.constraints(sa, Some(-1.0)) {
        p.push(c);
    }
    let sol = sdp::solve(&p)?;
    if sol.status != SdpStatus::Optimal {
        return Err(solver_error(&sol, "robustness program"));
    }
    let sr = sol.dual_objective - 1.0;
    let g = layout.coefficients(&sol.y, sa);
    let model = layout.model(&sol.x);
    finish_verdict(Quantity::Robustness, sr, g, model, sa, &layout, &sol, exec)
}

/// `SW = 1 − max Σ_λ Tr X_λ` subject to `Σ_λ D_λ(a|x) X_λ ⪯ ρ_{a|x}`.
pub fn steerable_weight(sa: &StateAssemblage) -> Result<SteeringVerdict> {
    steerable_weight_with(sa, Execution::Sequential)
}

pub fn steerable_weight_with(sa: &StateAssemblage, exec: Execution) -> Result<SteeringVerdict> {
    on_support(sa, exec, weight_program)
}

fn weight_program(sa: &StateAssemblage, exec: Execution) -> Result<SteeringVerdict> {
    let layout = Layout::new(sa, false)?;
    let (nl, n2) = (layout.strategies.len(), 2 * layout.n);
    let slacks = sa.settings() * sa.outcomes();
    let mut p = SdpProblem::new(vec![n2; nl + slacks]);
    for l in 0..nl {
        p.set_objective(l, SymMatrix::identity(n2).scaled(-0.5));
    }
    for c in layout.constraints(sa, Some(1.0)) {
        p.push(c);
    }
    let sol = sdp::solve(&p)?;
    if sol.status != SdpStatus::Optimal {
        return Err(solver_error(&sol, "weight program"));
    }
    let sw = 1.0 + sol.dual_objective;
    let g = layout.coefficients(&sol.y, sa);
    let model: Vec<Operator> = layout.model(&sol.x);
    finish_verdict(Quantity::Weight, sw, g, model, sa, &layout, &sol, exec)
}

#[allow(clippy::too_many_arguments)]
fn finish_verdict(
    quantity: Quantity,
    value: f64,
    g: Vec<Vec<Operator>>,
    model: Vec<Operator>,
    sa: &StateAssemblage,
    layout: &Layout,
    sol: &SdpSolution,
    exec: Execution,
) -> Result<SteeringVerdict> {
    let diagnostics = Some(SolverDiagnostics::from(sol));
    let steerable = value > tol::STEERING_BOUNDARY;
    let mut boundary = value > tol::STEERING_BAND && value <= tol::STEERING_BOUNDARY;
    if steerable {
        let witness = normalize_witness(g, sa, &layout.strategies, exec);
        let valid = witness.as_ref().is_some_and(witness_is_valid);
        if !valid {
            boundary = true;
            if witness.as_ref().is_none_or(|w| w.value <= w.bound) {
                return Err(Error::Solver {
                    status: sol.status,
                    detail: format!("{quantity:?} value {value:.3e} but the dual does not separate the assemblage"),
                });
            }
        }
        return Ok(SteeringVerdict { quantity, steerable, value, boundary, model: None, witness, diagnostics });
    }
    let model = if model_is_valid(&model, sa, &layout.strategies) {
        model
    } else {
        // The program's primal only reproduces up to its slack; fetch an exact model.
        match test_unsteerable_feasible_model(sa)? {
            Some(m) => m,
            None => {
                boundary = true;
                model
            }
        }
    };
    Ok(SteeringVerdict { quantity, steerable, value, boundary, model: Some(model), witness: None, diagnostics })
}

fn test_unsteerable_feasible_model(sa: &StateAssemblage) -> Result<Option<Vec<Operator>>> {
    let layout = Layout::new(sa, true)?;
    let mut p = SdpProblem::new(vec![2 * layout.n; layout.strategies.len()]);
    for c in layout.constraints(sa, None) {
        p.push(c);
    }
    let phase1 = match sdp::check_feasible(&p) {
        Ok(r) => r,
        Err(e) if e.is_solver_failure() => return Ok(None),
        Err(e) => return Err(e),
    };
    match phase1.outcome {
        FeasibilityOutcome::Feasible(x) => {
            let model = layout.model(&x);
            Ok(model_is_valid(&model, sa, &layout.strategies).then_some(model))
        }
        FeasibilityOutcome::Infeasible(_) => Ok(None),
    }
}

/// Eigenvalues of the reduced state at or below this are treated as zero.
const SUPPORT_CUTOFF: f64 = 1e-13;

/// Isometry onto the range of `ρ = Σ_a ρ_{a|x}` and the assemblage
/// compressed to it, or `None` when `ρ` has full rank.
///
/// Every member and every model operator lives on that range, so all three
/// programs take the same value on the compressed assemblage; without the
/// compression a rank-deficient `ρ` leaves phase-I with no interior point.
fn support(sa: &StateAssemblage) -> Result<Option<(Operator, StateAssemblage)>> {
    let eig = eig_hermitian(&sa.reduced())?;
    let n = sa.dim();
    let keep: Vec<usize> = (0..n).filter(|&k| eig.values[k] > SUPPORT_CUTOFF).collect();
    if keep.len() == n || keep.is_empty() {
        return Ok(None);
    }
    let v = Operator::from_fn(n, keep.len(), |r, c| eig.vectors[(r, keep[c])]);
    let vd = v.adjoint();
    let members =
        sa.members().iter().map(|row| row.iter().map(|m| vd.matmul(m).matmul(&v).hermitian_part()).collect()).collect();
    Ok(Some((v, StateAssemblage::new(members)?)))
}

/// Run `program` on the support of the assemblage and lift its certificate
/// back; the lifted certificate is re-verified against the original, and the
/// uncompressed program is the fallback.
fn on_support(
    sa: &StateAssemblage,
    exec: Execution,
    program: fn(&StateAssemblage, Execution) -> Result<SteeringVerdict>,
) -> Result<SteeringVerdict> {
    let Some((v, reduced)) = support(sa)? else {
        return program(sa, exec);
    };
    let mut verdict = match program(&reduced, exec) {
        Ok(verdict) => verdict,
        Err(e) if e.is_solver_failure() => return program(sa, exec),
        Err(e) => return Err(e),
    };
    let strategies = DeterministicStrategySet::new(sa.settings(), sa.outcomes())?;
    let lift = |x: &Operator| v.matmul(x).matmul(&v.adjoint()).hermitian_part();
    if let Some(model) = verdict.model.take() {
        let lifted: Vec<Operator> = model.iter().map(lift).collect();
        if !verdict.boundary && !model_is_valid(&lifted, sa, &strategies) {
            return program(sa, exec);
        }
        verdict.model = Some(lifted);
    }
    if let Some(w) = verdict.witness.take() {
        let operators: Vec<Vec<Operator>> = w.operators.iter().map(|row| row.iter().map(lift).collect()).collect();
        let bound = unsteerable_bound(&operators, &strategies, exec);
        let lifted = Witness { value: functional(&operators, sa), bound, operators };
        if !verdict.boundary && !witness_is_valid(&lifted) {
            return program(sa, exec);
        }
        verdict.witness = Some(lifted);
    }
    Ok(verdict)
}

/// Independent verdicts over a batch of assemblages.
pub fn test_unsteerable_batch(batch: &[StateAssemblage], exec: Execution) -> Vec<Result<SteeringVerdict>> {
    par::map(exec, batch, test_unsteerable)
}

pub fn steering_robustness_batch(batch: &[StateAssemblage], exec: Execution) -> Vec<Result<SteeringVerdict>> {
    par::map(exec, batch, steering_robustness)
}
