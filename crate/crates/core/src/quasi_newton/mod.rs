//! DFP and BFGS on `f₁(X) = ½‖AX + XB − C‖_F²`.
//!
//! Two representations of the inverse-Hessian approximation `G` are offered.
//! In [`QnMode::MatrixForm`] `G` is m×m and acts on the m×n gradient from the
//! left; the update "fractions" have n×n denominators and are applied through
//! Moore–Penrose inverses. In [`QnMode::Vectorized`] `G` is mn×mn and acts on
//! `vec(g)`, which is the textbook method.

mod linesearch;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use linesearch::{armijo_search_fn, wolfe_search_fn, MAX_TRIALS};

use crate::error::{Error, Result};
use crate::linalg::{
    dot, pseudo_inverse_with_rank, unvec, vec, Matrix, DEFAULT_KRON_CAP, DEFAULT_RANK_TOL,
};
use crate::problems::SylvesterProblem;
use crate::report::{ReportBuilder, SolveReport, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QnMethod {
    Dfp,
    Bfgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineSearch {
    Exact,
    Armijo,
    Wolfe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QnMode {
    MatrixForm,
    Vectorized,
}

macro_rules! keyword_enum {
    ($ty:ty, $($variant:path => $name:literal),+) => {
        impl $ty {
            pub fn name(self) -> &'static str {
                match self { $($variant => $name),+ }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().replace('-', "_").as_str() {
                    $($name => Ok($variant),)+
                    other => Err(Error::Config(format!("unknown {} '{other}'", stringify!($ty)))),
                }
            }
        }
    };
}

keyword_enum!(QnMethod, QnMethod::Dfp => "dfp", QnMethod::Bfgs => "bfgs");
keyword_enum!(LineSearch, LineSearch::Exact => "exact", LineSearch::Armijo => "armijo", LineSearch::Wolfe => "wolfe");
keyword_enum!(QnMode, QnMode::MatrixForm => "matrix_form", QnMode::Vectorized => "vectorized");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QnConfig {
    pub method: QnMethod,
    pub linesearch: LineSearch,
    pub sigma1: f64,
    pub sigma2: f64,
    /// Stop once `‖g‖_F < grad_tol`.
    pub grad_tol: f64,
    pub max_iterations: usize,
    pub mode: QnMode,
    /// Vectorized updates with `⟨δ, y⟩` at or below this are skipped.
    pub curvature_floor: f64,
    /// Relative singular-value cutoff for the matrix-form denominators.
    pub rank_tol: f64,
    /// Entry cap for the mn×mn vectorized `G`.
    pub kron_cap: usize,
    /// `G` is reset when the cosine between its direction and the steepest
    /// descent direction falls below this.
    pub min_cosine: f64,
}

impl Default for QnConfig {
    fn default() -> Self {
        Self {
            method: QnMethod::Dfp,
            linesearch: LineSearch::Exact,
            sigma1: 1e-4,
            sigma2: 0.9,
            grad_tol: 1e-8,
            max_iterations: 500,
            mode: QnMode::MatrixForm,
            curvature_floor: 1e-14,
            rank_tol: DEFAULT_RANK_TOL,
            kron_cap: DEFAULT_KRON_CAP,
            min_cosine: 1e-3,
        }
    }
}

impl QnConfig {
    pub fn new(method: QnMethod) -> Self {
        Self { method, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.sigma1 && self.sigma1 < 0.5) {
            return Err(Error::Config(format!("sigma1 must lie in (0, 0.5), got {}", self.sigma1)));
        }
        if !(self.sigma1 < self.sigma2 && self.sigma2 < 1.0) {
            return Err(Error::Config(format!("sigma2 must lie in (sigma1, 1), got {}", self.sigma2)));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::Config("grad_tol must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.min_cosine) {
            return Err(Error::Config(format!("min_cosine must lie in [0, 1), got {}", self.min_cosine)));
        }
        Ok(())
    }
}

/// `½‖AX + XB − C‖_F²`
pub fn f1_value(p: &SylvesterProblem, x: &Matrix) -> Result<f64> {
    p.check_unknown(x)?;
    let r = p.residual_matrix(x).frobenius_norm();
    Ok(0.5 * r * r)
}

/// `AᵀR + RBᵀ` with `R = AX + XB − C`, the gradient of [`f1_value`].
pub fn f1_gradient(p: &SylvesterProblem, x: &Matrix) -> Result<Matrix> {
    p.check_unknown(x)?;
    Ok(adjoint_apply(p, &p.residual_matrix(x)))
}

fn adjoint_apply(p: &SylvesterProblem, r: &Matrix) -> Matrix {
    let mut g = p.a().t_matmul(r);
    g += &r.matmul_t(p.b());
    g
}

fn exact_from(r: &Matrix, s: &Matrix) -> Result<f64> {
    let ss = dot(s, s);
    if ss == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    Ok((-dot(r, s) / ss).max(0.0))
}

/// The minimizer over `λ ≥ 0` of `f₁(X + λ·dir)`: with `R` the residual and
/// `S = A·dir + dir·B`, `λ* = max(0, −⟨R,S⟩/⟨S,S⟩)`.
pub fn exact_step(p: &SylvesterProblem, x: &Matrix, dir: &Matrix) -> Result<f64> {
    p.check_unknown(x)?;
    p.check_unknown(dir)?;
    exact_from(&p.residual_matrix(x), &p.apply(dir))
}

/// Wolfe step along `dir` for `f₁`. `f₁` is quadratic along a line, so the
/// profile is evaluated from `R` and `S = A·dir + dir·B` without new products.
pub fn wolfe_search(p: &SylvesterProblem, x: &Matrix, dir: &Matrix, sigma1: f64, sigma2: f64) -> Result<f64> {
    p.check_unknown(x)?;
    p.check_unknown(dir)?;
    let (r, s) = (p.residual_matrix(x), p.apply(dir));
    wolfe_search_fn(line_profile(&r, &s), sigma1, sigma2)
}

/// `α ↦ (½‖R + αS‖² − ½‖R‖², ⟨R + αS, S⟩)`. The constant is dropped so
/// decreases far below `‖R‖²` stay visible to the line search.
fn line_profile(r: &Matrix, s: &Matrix) -> impl Fn(f64) -> (f64, f64) {
    let (rs, ss) = (dot(r, s), dot(s, s));
    move |a| (a * rs + 0.5 * a * a * ss, rs + a * ss)
}

/// DFP inverse-Hessian update. See the module docs for the two modes.
pub fn dfp_update(g: &Matrix, delta: &Matrix, y: &Matrix, mode: QnMode, cfg: &QnConfig) -> Result<UpdateOutcome> {
    match mode {
        QnMode::Vectorized => {
            let (d, yv) = (vec(delta), vec(y));
            let dy = dot(&d, &yv);
            let gy = g * &yv;
            let ygy = dot(&yv, &gy);
            if dy <= cfg.curvature_floor {
                return Err(Error::Curvature(dy));
            }
            if ygy <= cfg.curvature_floor {
                return Err(Error::Curvature(ygy));
            }
            let mut next = g.clone();
            rank_one(&mut next, 1.0 / dy, &d);
            rank_one(&mut next, -1.0 / ygy, &gy);
            Ok(UpdateOutcome { g: next.symmetrize(), full_rank: true })
        }
        QnMode::MatrixForm => {
            let n = delta.cols();
            let (k1, r1) = pseudo_inverse_with_rank(&delta.t_matmul(y), cfg.rank_tol);
            let gy = g * y;
            let (k2, r2) = pseudo_inverse_with_rank(&y.t_matmul(&gy), cfg.rank_tol);
            let mut next = g.clone();
            next += &(&(delta * &k1)).matmul_t(delta);
            next -= &(&(&gy * &k2)).matmul_t(&gy);
            Ok(UpdateOutcome { g: next.symmetrize(), full_rank: r1 == n && r2 == n })
        }
    }
}

/// BFGS inverse-Hessian update. See the module docs for the two modes.
pub fn bfgs_update(g: &Matrix, delta: &Matrix, y: &Matrix, mode: QnMode, cfg: &QnConfig) -> Result<UpdateOutcome> {
    match mode {
        QnMode::Vectorized => {
            let (d, yv) = (vec(delta), vec(y));
            let dy = dot(&d, &yv);
            if dy <= cfg.curvature_floor {
                return Err(Error::Curvature(dy));
            }
            // G⁺ = G − ρ(δ(Gy)ᵀ + (Gy)δᵀ) + (ρ + ρ²·yᵀGy)δδᵀ, ρ = 1/⟨δ,y⟩
            let rho = 1.0 / dy;
            let gy = g * &yv;
            let ygy = dot(&yv, &gy);
            let mut next = g.clone();
            let t = d.len();
            let (ds, gs, out) = (d.as_slice(), gy.as_slice(), next.as_mut_slice());
            let c = rho + rho * rho * ygy;
            for i in 0..t {
                for j in 0..t {
                    out[i * t + j] += -rho * (ds[i] * gs[j] + gs[i] * ds[j]) + c * ds[i] * ds[j];
                }
            }
            Ok(UpdateOutcome { g: next.symmetrize(), full_rank: true })
        }
        QnMode::MatrixForm => {
            let m = delta.rows();
            let n = delta.cols();
            let (k, rank) = pseudo_inverse_with_rank(&delta.t_matmul(y), cfg.rank_tol);
            let dk = delta * &k;
            // E = I − δ·K·yᵀ
            let mut e = -dk.matmul_t(y);
            e.add_diag(1.0);
            let mut next = (&e * g).matmul_t(&e);
            next += &dk.matmul_t(delta);
            debug_assert_eq!(next.shape(), (m, m));
            Ok(UpdateOutcome { g: next.symmetrize(), full_rank: rank == n })
        }
    }
}

fn rank_one(m: &mut Matrix, s: f64, v: &Matrix) {
    let t = v.len();
    let vs = v.as_slice();
    for (i, row) in m.as_mut_slice().chunks_mut(t).enumerate() {
        let si = s * vs[i];
        for (x, vj) in row.iter_mut().zip(vs) {
            *x += si * vj;
        }
    }
}

/// Result of one inverse-Hessian update.
#[derive(Debug, Clone)]
pub struct UpdateOutcome {
    pub g: Matrix,
    /// Whether every pseudo-inverted denominator had full rank. In matrix
    /// form the secant condition then holds up to roundoff only if `δᵀy` is
    /// also symmetric, since `G` is symmetrized after the update.
    pub full_rank: bool,
}

/// One accepted update, as seen by an observer.
#[derive(Debug)]
pub struct QnUpdate<'a> {
    pub iteration: usize,
    pub mode: QnMode,
    pub previous: &'a Matrix,
    pub updated: &'a Matrix,
    pub delta: &'a Matrix,
    pub y: &'a Matrix,
    pub full_rank: bool,
}

impl QnUpdate<'_> {
    /// `‖G⁺y − δ‖_F`, on vec'd quantities in vectorized mode.
    pub fn secant_residual(&self) -> f64 {
        match self.mode {
            QnMode::MatrixForm => (&(self.updated * self.y) - self.delta).frobenius_norm(),
            QnMode::Vectorized => (&(self.updated * &vec(self.y)) - &vec(self.delta)).frobenius_norm(),
        }
    }
}

pub fn solve_quasi_newton(p: &SylvesterProblem, cfg: &QnConfig) -> Result<SolveReport> {
    solve_quasi_newton_observed(p, cfg, None, |_| {})
}

/// Runs DFP or BFGS from `x0` (zero when `None`) with `G₀ = I`, calling
/// `observe` after every inverse-Hessian update.
///
/// Skipped updates (vectorized curvature failures) are counted in
/// `detail["skipped_updates"]`. If `G` stops producing a descent direction
/// (one within `acos(min_cosine)` of steepest descent), or its direction
/// defeats the line search, it is reset to the identity, counted in
/// `detail["resets"]`.
pub fn solve_quasi_newton_observed(
    p: &SylvesterProblem,
    cfg: &QnConfig,
    x0: Option<&Matrix>,
    mut observe: impl FnMut(&QnUpdate<'_>),
) -> Result<SolveReport> {
    cfg.validate()?;
    let (m, n) = p.shape();
    let mut x = match x0 {
        Some(x0) => {
            p.check_unknown(x0)?;
            x0.clone()
        }
        None => Matrix::zeros(m, n),
    };
    let order = match cfg.mode {
        QnMode::MatrixForm => m,
        QnMode::Vectorized => {
            let t = m * n;
            if t.checked_mul(t).is_none_or(|e| e > cfg.kron_cap) {
                return Err(Error::Capacity { requested: t.saturating_mul(t), cap: cfg.kron_cap });
            }
            t
        }
    };
    let mut g_inv = Matrix::identity(order);
    let mut r = p.residual_matrix(&x);
    let mut grad = adjoint_apply(p, &r);
    let mut report = ReportBuilder::new(r.frobenius_norm());
    let (mut skipped, mut resets) = (0usize, 0usize);

    let abort = |cause: Error, report: ReportBuilder, x: &Matrix| Error::Aborted {
        cause: Box::new(cause),
        partial: Box::new(report.finish(x.clone(), Termination::Error)),
    };

    let mut termination = Termination::MaxIterations;
    while report.iterations() < cfg.max_iterations {
        if grad.frobenius_norm() < cfg.grad_tol {
            termination = Termination::Converged;
            break;
        }
        let mut dir = direction(&g_inv, &grad, cfg.mode, m, n);
        let mut s = p.apply(&dir);
        let mut is_identity = false;
        let cosine = -dot(&grad, &dir) / (grad.frobenius_norm() * dir.frobenius_norm());
        if !(cosine > cfg.min_cosine) || !dot(&s, &s).is_finite() {
            g_inv = Matrix::identity(order);
            resets += 1;
            is_identity = true;
            dir = -&grad;
            s = p.apply(&dir);
        }
        let mut step = line_step(cfg, &r, &s, dot(&grad, &dir));
        if matches!(step, Err(Error::LinesearchFailed(_))) && !is_identity {
            log::warn!("iteration {}: line search failed on the quasi-Newton direction, resetting", report.iterations());
            g_inv = Matrix::identity(order);
            resets += 1;
            dir = -&grad;
            s = p.apply(&dir);
            step = line_step(cfg, &r, &s, dot(&grad, &dir));
        }
        let lambda = match step {
            Ok(l) if !l.is_finite() => return Err(abort(Error::LinesearchFailed(format!("step {l}")), report, &x)),
            Ok(l) => l,
            Err(e) => return Err(abort(e, report, &x)),
        };
        if lambda == 0.0 {
            termination = Termination::Stagnated;
            break;
        }
        let delta = dir.scale(lambda);
        x += &delta;
        r = p.residual_matrix(&x);
        let next_grad = adjoint_apply(p, &r);
        let y = &next_grad - &grad;
        grad = next_grad;
        report.step(r.frobenius_norm());
        if grad.frobenius_norm() < cfg.grad_tol {
            termination = Termination::Converged;
            break;
        }
        let outcome = match cfg.method {
            QnMethod::Dfp => dfp_update(&g_inv, &delta, &y, cfg.mode, cfg),
            QnMethod::Bfgs => bfgs_update(&g_inv, &delta, &y, cfg.mode, cfg),
        };
        match outcome {
            Ok(u) if !u.g.is_finite() => {
                log::warn!("iteration {}: update overflowed, resetting to the identity", report.iterations());
                g_inv = Matrix::identity(order);
                resets += 1;
            }
            Ok(u) => {
                observe(&QnUpdate {
                    iteration: report.iterations(),
                    mode: cfg.mode,
                    previous: &g_inv,
                    updated: &u.g,
                    delta: &delta,
                    y: &y,
                    full_rank: u.full_rank,
                });
                g_inv = u.g;
            }
            Err(Error::Curvature(c)) => {
                log::warn!("iteration {}: curvature {c:e} at or below floor, update skipped", report.iterations());
                skipped += 1;
            }
            Err(e) => return Err(abort(e, report, &x)),
        }
    }
    report.detail("gradient_norm", grad.frobenius_norm());
    report.detail("skipped_updates", skipped);
    report.detail("resets", resets);
    Ok(report.finish(x, termination))
}

fn line_step(cfg: &QnConfig, r: &Matrix, s: &Matrix, slope: f64) -> Result<f64> {
    match cfg.linesearch {
        LineSearch::Exact => exact_from(r, s),
        LineSearch::Wolfe => wolfe_search_fn(line_profile(r, s), cfg.sigma1, cfg.sigma2),
        LineSearch::Armijo => {
            let profile = line_profile(r, s);
            armijo_search_fn(|a| profile(a).0, slope, cfg.sigma1)
        }
    }
}

fn direction(g_inv: &Matrix, grad: &Matrix, mode: QnMode, m: usize, n: usize) -> Matrix {
    match mode {
        QnMode::MatrixForm => -(g_inv * grad),
        QnMode::Vectorized => {
            -unvec(&(g_inv * &vec(grad)), m, n).expect("shape fixed by construction")
        }
    }
}
