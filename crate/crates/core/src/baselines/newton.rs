use serde::{Deserialize, Serialize};

use super::lyapunov::solve_lyapunov_direct_capped;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, DEFAULT_KRON_CAP};
use crate::problems::{CareProblem, LyapunovProblem, SYMMETRY_TOL};
use crate::report::{ReportBuilder, SolveReport, Termination};

/// `‖AᵀX + XA − XNX + K‖_F`
pub fn care_residual(p: &CareProblem, x: &Matrix) -> Result<f64> {
    p.check_unknown(x)?;
    Ok(p.residual_matrix(x).frobenius_norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iterations: usize,
    pub kron_cap: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iterations: 1000, kron_cap: DEFAULT_KRON_CAP }
    }
}

pub fn solve_newton_care(p: &CareProblem, x0: &Matrix, cfg: &NewtonConfig) -> Result<SolveReport> {
    solve_newton_care_observed(p, x0, cfg, |_, _| {})
}

/// Exact Newton: `A_k = A − N·X_k`, `Q_k = X_k·N·X_k + K`, and `X_{k+1}` solves
/// `A_kᵀX + XA_k + Q_k = 0` directly. `observe(k, X_k)` sees every iterate.
pub fn solve_newton_care_observed(
    p: &CareProblem,
    x0: &Matrix,
    cfg: &NewtonConfig,
    mut observe: impl FnMut(usize, &Matrix),
) -> Result<SolveReport> {
    if !(cfg.tol > 0.0) {
        return Err(Error::Config("tol must be positive".into()));
    }
    p.check_unknown(x0)?;
    if !x0.is_symmetric(SYMMETRY_TOL * x0.max_abs().max(1.0)) {
        return Err(Error::Precondition("initial iterate must be symmetric".into()));
    }
    let mut x = x0.clone();
    let mut report = ReportBuilder::new(care_residual(p, &x)?);
    observe(0, &x);
    let mut termination = Termination::MaxIterations;
    loop {
        if report.last() <= cfg.tol {
            termination = Termination::Converged;
            break;
        }
        if !report.last().is_finite() {
            termination = Termination::Diverged;
            break;
        }
        if report.iterations() == cfg.max_iterations {
            break;
        }
        let nx = p.n_mat() * &x;
        let a_k = p.a() - &nx;
        let mut q_k = x.t_matmul(&nx);
        q_k += p.k_mat();
        let step = LyapunovProblem::new(a_k, q_k.symmetrize())
            .and_then(|lyap| solve_lyapunov_direct_capped(&lyap, cfg.kron_cap));
        match step {
            Ok(next) => x = next,
            Err(e) => {
                let iteration = report.iterations() + 1;
                return Err(Error::Aborted {
                    cause: Box::new(Error::NewtonBreakdown { iteration, source: Box::new(e) }),
                    partial: Box::new(report.finish(x, Termination::Error)),
                });
            }
        }
        report.step(care_residual(p, &x)?);
        observe(report.iterations(), &x);
    }
    Ok(report.finish(x, termination))
}
