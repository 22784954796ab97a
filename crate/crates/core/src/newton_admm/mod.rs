//! Newton's method for CARE with each Newton step, a Lyapunov equation,
//! solved inexactly by three-block ADMM.

mod lyapunov_admm;

use serde::{Deserialize, Serialize};

pub use lyapunov_admm::{
    lyap_admm_step, lyap_decrease_bound, lyap_kkt_residuals, lyap_lagrangian_value, solve_lyapunov_admm,
    solve_lyapunov_admm_observed, LyapAdmmConfig, LyapAdmmState,
};

use crate::baselines::care_residual;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, Matrix};
use crate::problems::{CareProblem, LyapunovProblem, SYMMETRY_TOL};
use crate::report::{ReportBuilder, SolveReport, Termination};

/// How tightly each inner Lyapunov solve is converged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum InnerTolRule {
    /// The same absolute tolerance for every inner solve.
    Fixed(f64),
    /// `η · care_residual(X_k)`, floored at `outer_tol / 10`.
    Forcing(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonAdmmConfig {
    pub alpha: f64,
    pub beta: f64,
    pub outer_tol: f64,
    pub outer_max: usize,
    pub inner_tol_rule: InnerTolRule,
    pub inner_max: usize,
    /// Start each inner solve from the previous inner state instead of zero.
    pub warm_start: bool,
}

impl Default for NewtonAdmmConfig {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            beta: 50.0,
            outer_tol: 1e-8,
            outer_max: 50,
            inner_tol_rule: InnerTolRule::Forcing(0.1),
            inner_max: 5000,
            warm_start: true,
        }
    }
}

impl NewtonAdmmConfig {
    pub fn with_penalties(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("outer_tol", self.outer_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        match self.inner_tol_rule {
            InnerTolRule::Fixed(t) if !(t > 0.0) => Err(Error::Config("fixed inner tolerance must be positive".into())),
            InnerTolRule::Forcing(eta) if !(eta > 0.0 && eta < 1.0) => {
                Err(Error::Config(format!("forcing factor must lie in (0, 1), got {eta}")))
            }
            _ => Ok(()),
        }
    }

    fn inner_tol(&self, outer_residual: f64) -> f64 {
        match self.inner_tol_rule {
            InnerTolRule::Fixed(t) => t,
            InnerTolRule::Forcing(eta) => (eta * outer_residual).max(self.outer_tol / 10.0),
        }
    }
}

/// `(A − NX)ᵀE + E(A − NX)`, the derivative of the CARE residual map at `X`
/// applied to `E`.
pub fn frechet_apply(p: &CareProblem, x: &Matrix, e: &Matrix) -> Result<Matrix> {
    p.check_unknown(x)?;
    p.check_unknown(e)?;
    let closed = p.a() - &(p.n_mat() * x);
    let mut out = closed.t_matmul(e);
    out += &(e * &closed);
    Ok(out)
}

/// The Lyapunov equation of one Newton step:
/// `A_k = A − N·X_k`, `Q_k = X_k·N·X_k + K`.
pub fn newton_step_problem(p: &CareProblem, x: &Matrix) -> Result<LyapunovProblem> {
    let nx = p.n_mat() * x;
    let mut q = x.t_matmul(&nx);
    q += p.k_mat();
    LyapunovProblem::new(p.a() - &nx, q.symmetrize())
}

/// Progress notifications from [`solve_newton_admm_observed`].
#[derive(Debug)]
pub enum NewtonAdmmEvent<'a> {
    /// One inner ADMM sweep on the Newton-step equation `problem`.
    Inner { outer: usize, problem: &'a LyapunovProblem, alpha: f64, beta: f64, prev: &'a LyapAdmmState, next: &'a LyapAdmmState },
    /// One completed Newton step.
    Outer { outer: usize, x_prev: &'a Matrix, x_next: &'a Matrix, inner_tol: f64 },
}

pub fn solve_newton_admm(p: &CareProblem, x0: &Matrix, cfg: &NewtonAdmmConfig) -> Result<SolveReport> {
    solve_newton_admm_observed(p, x0, cfg, |_| {})
}

/// Newton-ADMM from a symmetric `x0`.
///
/// `iterations` is the total number of inner sweeps, and the history holds
/// the CARE residual after every sweep. `detail` records the outer count,
/// per-outer inner counts, and the CARE residual after each Newton step.
/// Two consecutive inner solves hitting `inner_max` end the run as stagnated.
pub fn solve_newton_admm_observed(
    p: &CareProblem,
    x0: &Matrix,
    cfg: &NewtonAdmmConfig,
    mut observe: impl FnMut(NewtonAdmmEvent<'_>),
) -> Result<SolveReport> {
    cfg.validate()?;
    p.check_unknown(x0)?;
    if !x0.is_symmetric(SYMMETRY_TOL * x0.max_abs().max(1.0)) {
        return Err(Error::Precondition("initial iterate must be symmetric".into()));
    }
    let n = p.order();
    let closed_loop = p.a() - &(p.n_mat() * x0);
    let stable = eigenvalues(&closed_loop)?.iter().all(|&(re, _)| re < 0.0);
    if !stable {
        log::warn!("A − N·X0 is not stable; Newton may converge to a non-stabilizing solution");
    }

    let mut x = x0.clone();
    let mut res = care_residual(p, &x)?;
    let mut report = ReportBuilder::new(res);
    let mut outer_residuals = vec![res];
    let mut inner_counts: Vec<usize> = Vec::new();
    let mut inner_state: Option<LyapAdmmState> = None;
    let mut maxed_in_a_row = 0;
    let mut termination = Termination::MaxIterations;
    for outer in 1..=cfg.outer_max {
        if res <= cfg.outer_tol {
            termination = Termination::Converged;
            break;
        }
        let lyap = newton_step_problem(p, &x)?;
        let inner_tol = cfg.inner_tol(res);
        let inner_cfg = LyapAdmmConfig { alpha: cfg.alpha, beta: cfg.beta, tol: inner_tol, max_iterations: cfg.inner_max };
        let init = if cfg.warm_start { inner_state.take() } else { None };
        let init = init.unwrap_or_else(|| LyapAdmmState::zeros(n));
        let mut care_res_err = None;
        let run = solve_lyapunov_admm_observed(&lyap, &inner_cfg, Some(&init), |prev, next| {
            match care_residual(p, &next.x) {
                Ok(r) => report.step(r),
                Err(e) => care_res_err = Some(e),
            }
            observe(NewtonAdmmEvent::Inner { outer, problem: &lyap, alpha: cfg.alpha, beta: cfg.beta, prev, next });
        });
        if let Some(e) = care_res_err {
            return Err(e);
        }
        let (inner, state) = match run {
            Ok(v) => v,
            Err(e) => {
                return Err(Error::Aborted {
                    cause: Box::new(Error::NewtonBreakdown { iteration: outer, source: Box::new(e) }),
                    partial: Box::new(report.finish(x, Termination::Error)),
                })
            }
        };
        inner_counts.push(inner.iterations);
        let x_next = inner.solution;
        res = care_residual(p, &x_next)?;
        if inner.iterations > 0 {
            report.replace_last(res);
        }
        outer_residuals.push(res);
        observe(NewtonAdmmEvent::Outer { outer, x_prev: &x, x_next: &x_next, inner_tol });
        x = x_next;
        inner_state = Some(state);

        if inner.termination == Termination::MaxIterations {
            maxed_in_a_row += 1;
            if maxed_in_a_row == 2 {
                termination = Termination::Stagnated;
                break;
            }
        } else {
            maxed_in_a_row = 0;
        }
        if !res.is_finite() {
            termination = Termination::Diverged;
            break;
        }
    }
    if termination == Termination::MaxIterations && res <= cfg.outer_tol {
        termination = Termination::Converged;
    }
    report.detail("outer_iterations", inner_counts.len());
    report.detail("inner_iterations", inner_counts);
    report.detail("outer_residuals", outer_residuals);
    report.detail("initial_closed_loop_stable", stable);
    Ok(report.finish(x, termination))
}
