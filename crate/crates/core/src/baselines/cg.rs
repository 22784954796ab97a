use super::BaselineConfig;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::problems::{SylvesterProblem, SYMMETRY_TOL};
use crate::report::{ReportBuilder, SolveReport, Termination};

/// Conjugate gradient on `L(X) = AX + XB` with the trace inner product,
/// starting from `X₀ = 0`. `A` and `B` must be symmetric positive definite.
pub fn solve_cg(p: &SylvesterProblem, cfg: &BaselineConfig) -> Result<SolveReport> {
    solve_cg_observed(p, cfg, None, |_| {})
}

/// [`solve_cg`] from `x0`, passing each search direction to `observe`.
pub fn solve_cg_observed(
    p: &SylvesterProblem,
    cfg: &BaselineConfig,
    x0: Option<&Matrix>,
    mut observe: impl FnMut(&Matrix),
) -> Result<SolveReport> {
    cfg.validate()?;
    for (name, m) in [("A", p.a()), ("B", p.b())] {
        if !m.is_symmetric(SYMMETRY_TOL * m.max_abs().max(1.0)) {
            return Err(Error::Precondition(format!("CG needs a symmetric {name}")));
        }
    }
    let (m, n) = p.shape();
    let mut x = match x0 {
        Some(x0) => {
            p.check_unknown(x0)?;
            x0.clone()
        }
        None => Matrix::zeros(m, n),
    };
    // r = C − L(X) is the negative of the reported residual
    let mut r = -p.residual_matrix(&x);
    let mut report = ReportBuilder::new(r.frobenius_norm());
    let mut dir = r.clone();
    let mut rr = dot(&r, &r);
    let mut termination = Termination::MaxIterations;
    loop {
        if report.last() <= cfg.tol {
            termination = Termination::Converged;
            break;
        }
        if report.iterations() == cfg.max_iterations {
            break;
        }
        observe(&dir);
        let ld = p.apply(&dir);
        let curvature = dot(&dir, &ld);
        if !(curvature > 0.0) {
            let partial = report.finish(x, Termination::Error);
            return Err(Error::Aborted {
                cause: Box::new(Error::Precondition("operator is not positive definite".into())),
                partial: Box::new(partial),
            });
        }
        let alpha = rr / curvature;
        x.axpy(alpha, &dir);
        r.axpy(-alpha, &ld);
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        rr = rr_next;
        dir = &r + &dir.scale(beta);
        report.step(p.residual_matrix(&x).frobenius_norm());
    }
    Ok(report.finish(x, termination))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::sylvester_family;

    #[test]
    fn scalar_converges_in_one_step() {
        let p = SylvesterProblem::new(Matrix::scalar(5.0), Matrix::scalar(6.0), Matrix::scalar(1.0)).unwrap();
        let r = solve_cg(&p, &BaselineConfig::default()).unwrap();
        assert!(r.converged());
        assert_eq!(r.iterations, 1);
        assert!((r.solution[(0, 0)] - 1.0 / 11.0).abs() < 1e-16);
    }

    #[test]
    fn starting_at_solution() {
        let p = SylvesterProblem::new(Matrix::scalar(5.0), Matrix::scalar(6.0), Matrix::scalar(1.0)).unwrap();
        let r = solve_cg_observed(&p, &BaselineConfig::default(), Some(&Matrix::scalar(1.0 / 11.0)), |_| {}).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.converged());
    }

    #[test]
    fn directions_are_conjugate() {
        let p = sylvester_family("t6", 6).unwrap();
        let mut dirs = Vec::new();
        let cfg = BaselineConfig { tol: 1e-14, ..Default::default() };
        solve_cg_observed(&p, &cfg, None, |d| dirs.push(d.clone())).unwrap();
        let k = dirs.len().min(5);
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    let lp = p.apply(&dirs[i]);
                    let v = dot(&lp, &dirs[j]).abs();
                    assert!(v <= 1e-8 * dirs[i].frobenius_norm() * dirs[j].frobenius_norm(), "{i},{j}: {v:e}");
                }
            }
        }
    }

    #[test]
    fn rejects_nonsymmetric() {
        let a = Matrix::from_rows(&[[2.0, 1.0], [0.0, 2.0]]).unwrap();
        let p = SylvesterProblem::new(a, Matrix::identity(2), Matrix::identity(2)).unwrap();
        assert!(matches!(solve_cg(&p, &BaselineConfig::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn indefinite_operator_aborts() {
        let p = SylvesterProblem::new(Matrix::from_diag(&[1.0, -3.0]), Matrix::scalar(0.5), Matrix::column(&[1.0, 1.0])).unwrap();
        let err = solve_cg(&p, &BaselineConfig::default()).unwrap_err();
        assert!(matches!(err.root(), Error::Precondition(_)));
    }
}
