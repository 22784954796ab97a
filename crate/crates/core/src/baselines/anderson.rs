use super::BaselineConfig;
use crate::error::Result;
use crate::linalg::{dot, Matrix};
use crate::problems::SylvesterProblem;
use crate::report::{ReportBuilder, SolveReport, Termination};

/// A residual growing past this multiple of the initial one counts as divergence.
const DIVERGENCE_FACTOR: f64 = 1e6;

/// Damped Richardson `g(X) = X − ω(AX + XB − C)` with depth-1 Anderson mixing:
///
/// `X_{k+1} = g(X_k) − γ_k(g(X_k) − g(X_{k−1}))`,
/// `γ_k = ⟨f_k − f_{k−1}, f_k⟩ / ‖f_k − f_{k−1}‖²`, `f_k = g(X_k) − X_k`.
///
/// Convergence is not guaranteed; this is a comparator.
pub fn solve_anderson_richardson(p: &SylvesterProblem, cfg: &BaselineConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let omega = cfg.richardson_omega.unwrap_or_else(|| 1.0 / (p.a().norm_one() + p.b().norm_one()));
    let (m, n) = p.shape();
    let mut x = Matrix::zeros(m, n);
    let mut res = p.residual_matrix(&x);
    let initial = res.frobenius_norm();
    let mut report = ReportBuilder::new(initial);
    report.detail("omega", omega);
    // (g(X_{k−1}), f_{k−1})
    let mut prev: Option<(Matrix, Matrix)> = None;
    let mut termination = Termination::MaxIterations;
    loop {
        let norm = report.last();
        if norm <= cfg.tol {
            termination = Termination::Converged;
            break;
        }
        if !norm.is_finite() || norm > DIVERGENCE_FACTOR * initial {
            termination = Termination::Diverged;
            break;
        }
        if report.iterations() == cfg.max_iterations {
            break;
        }
        let f = res.scale(-omega);
        let gx = &x + &f;
        let next = match &prev {
            Some((g_prev, f_prev)) => {
                let df = &f - f_prev;
                let denom = dot(&df, &df);
                if denom > 0.0 {
                    let gamma = dot(&df, &f) / denom;
                    &gx - &(&gx - g_prev).scale(gamma)
                } else {
                    gx.clone()
                }
            }
            None => gx.clone(),
        };
        prev = Some((gx, f));
        x = next;
        res = p.residual_matrix(&x);
        report.step(res.frobenius_norm());
    }
    Ok(report.finish(x, termination))
}
