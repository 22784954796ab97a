//! Three-block ADMM for `AᵀX + XA + Q = 0`, split as
//! `min ½‖Y + ZA + Q‖² s.t. AᵀX = Y, X = Z`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, SpdFactor};
use crate::problems::LyapunovProblem;
use crate::report::{ReportBuilder, SolveReport, Termination};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapAdmmState {
    pub x: Matrix,
    pub y: Matrix,
    pub z: Matrix,
    pub lambda: Matrix,
    pub pi: Matrix,
}

impl LyapAdmmState {
    pub fn zeros(n: usize) -> Self {
        let z = Matrix::zeros(n, n);
        Self { x: z.clone(), y: z.clone(), z: z.clone(), lambda: z.clone(), pi: z }
    }

    /// `(X, AᵀX, X)` with zero multipliers; a KKT point when `X` solves the equation.
    pub fn kkt_point(p: &LyapunovProblem, x: &Matrix) -> Self {
        let zero = Matrix::zeros(p.order(), p.order());
        Self { x: x.clone(), y: p.a().t_matmul(x), z: x.clone(), lambda: zero.clone(), pi: zero }
    }

    fn blocks(&self) -> [&Matrix; 5] {
        [&self.x, &self.y, &self.z, &self.lambda, &self.pi]
    }

    pub(crate) fn check(&self, n: usize) -> Result<()> {
        if self.blocks().iter().any(|b| b.shape() != (n, n)) {
            return Err(Error::dim(format!("every ADMM block must be {n}x{n}")));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &LyapAdmmState) -> f64 {
        self.blocks()
            .iter()
            .zip(other.blocks())
            .map(|(a, b)| (*a - b).max_abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LyapAdmmConfig {
    pub alpha: f64,
    pub beta: f64,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for LyapAdmmConfig {
    fn default() -> Self {
        Self { alpha: 0.8, beta: 50.0, tol: 1e-8, max_iterations: 5000 }
    }
}

impl LyapAdmmConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("tol", self.tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Both SPD systems, factored once per Lyapunov problem.
pub(crate) struct LyapStepper<'a> {
    p: &'a LyapunovProblem,
    alpha: f64,
    beta: f64,
    x_system: SpdFactor,
    z_system: SpdFactor,
}

impl<'a> LyapStepper<'a> {
    pub(crate) fn new(p: &'a LyapunovProblem, alpha: f64, beta: f64) -> Result<Self> {
        let aat = p.a().matmul_t(p.a()).symmetrize();
        let mut xs = aat.scale(alpha);
        xs.add_diag(beta);
        let mut zs = aat;
        zs.add_diag(beta);
        let fail = |what: &'static str| move |e: Error| Error::Breakdown(format!("{what} system: {e}"));
        Ok(Self {
            p,
            alpha,
            beta,
            x_system: SpdFactor::factor(&xs).map_err(fail("X"))?,
            z_system: SpdFactor::factor(&zs).map_err(fail("Z"))?,
        })
    }

    pub(crate) fn step(&self, s: &LyapAdmmState) -> Result<LyapAdmmState> {
        let (a, q) = (self.p.a(), self.p.q());
        let (alpha, beta) = (self.alpha, self.beta);

        // X = [αAAᵀ + βI]⁻¹ [AΛ + Π + αAY + βZ]
        let mut rhs = a * &s.lambda;
        rhs += &s.pi;
        rhs.axpy(alpha, &(a * &s.y));
        rhs.axpy(beta, &s.z);
        let x = self.x_system.solve(&rhs).map_err(|e| Error::Breakdown(format!("X system: {e}")))?;

        // Y = (1 + α)⁻¹ [αAᵀX − ZA − Q − Λ]
        let atx = a.t_matmul(&x);
        let mut y = atx.scale(alpha);
        y -= &(&s.z * a);
        y -= q;
        y -= &s.lambda;
        let y = y.scale(1.0 / (1.0 + alpha));

        // Z = [(−Y − Q)Aᵀ − Π + βX] [AAᵀ + βI]⁻¹
        let mut rhs = -(&(&y + q)).matmul_t(a);
        rhs -= &s.pi;
        rhs.axpy(beta, &x);
        let z = self.z_system.solve_right(&rhs).map_err(|e| Error::Breakdown(format!("Z system: {e}")))?;

        let mut lambda = s.lambda.clone();
        lambda.axpy(-alpha, &(&atx - &y));
        let mut pi = s.pi.clone();
        pi.axpy(-beta, &(&x - &z));
        Ok(LyapAdmmState { x, y, z, lambda, pi })
    }
}

/// One sweep X → Y → Z → Λ → Π.
pub fn lyap_admm_step(p: &LyapunovProblem, s: &LyapAdmmState, cfg: &LyapAdmmConfig) -> Result<LyapAdmmState> {
    cfg.validate()?;
    s.check(p.order())?;
    LyapStepper::new(p, cfg.alpha, cfg.beta)?.step(s)
}

/// Frobenius norms of `AΛ + Π`, `Y + ZA + Q + Λ`, `ZAAᵀ + (Y + Q)Aᵀ + Π`,
/// `AᵀX − Y` and `X − Z`.
pub fn lyap_kkt_residuals(p: &LyapunovProblem, s: &LyapAdmmState) -> [f64; 5] {
    let (a, q) = (p.a(), p.q());
    let r1 = &(a * &s.lambda) + &s.pi;
    let mut r2 = &s.y + &(&s.z * a);
    r2 += q;
    r2 += &s.lambda;
    let mut r3 = (&s.z * a).matmul_t(a);
    r3 += &(&s.y + q).matmul_t(a);
    r3 += &s.pi;
    let r4 = &a.t_matmul(&s.x) - &s.y;
    let r5 = &s.x - &s.z;
    [r1, r2, r3, r4, r5].map(|r| r.frobenius_norm())
}

/// `½‖Y+ZA+Q‖² − ⟨Λ,AᵀX−Y⟩ − ⟨Π,X−Z⟩ + α/2‖AᵀX−Y‖² + β/2‖X−Z‖²`
pub fn lyap_lagrangian_value(p: &LyapunovProblem, s: &LyapAdmmState, alpha: f64, beta: f64) -> f64 {
    let mut e = &s.y + &(&s.z * p.a());
    e += p.q();
    let g1 = &p.a().t_matmul(&s.x) - &s.y;
    let g2 = &s.x - &s.z;
    0.5 * dot(&e, &e) - dot(&s.lambda, &g1) - dot(&s.pi, &g2) + 0.5 * alpha * dot(&g1, &g1) + 0.5 * beta * dot(&g2, &g2)
}

/// `β/2‖ΔX‖² + α/2‖ΔY‖² + β/2‖ΔZ‖² − ‖ΔΛ‖²/α − ‖ΔΠ‖²/β`
pub fn lyap_decrease_bound(prev: &LyapAdmmState, next: &LyapAdmmState, alpha: f64, beta: f64) -> f64 {
    let sq = |a: &Matrix, b: &Matrix| {
        let d = a - b;
        dot(&d, &d)
    };
    0.5 * beta * sq(&prev.x, &next.x) + 0.5 * alpha * sq(&prev.y, &next.y) + 0.5 * beta * sq(&prev.z, &next.z)
        - sq(&prev.lambda, &next.lambda) / alpha
        - sq(&prev.pi, &next.pi) / beta
}

pub fn solve_lyapunov_admm(p: &LyapunovProblem, cfg: &LyapAdmmConfig, init: Option<&LyapAdmmState>) -> Result<SolveReport> {
    Ok(solve_lyapunov_admm_observed(p, cfg, init, |_, _| {})?.0)
}

/// Runs until `‖AᵀX + XA + Q‖_F ≤ tol`. The report's solution is the
/// symmetric part of the final `X` (its residual is never larger); the raw
/// final state is returned alongside for warm starts.
pub fn solve_lyapunov_admm_observed(
    p: &LyapunovProblem,
    cfg: &LyapAdmmConfig,
    init: Option<&LyapAdmmState>,
    mut observe: impl FnMut(&LyapAdmmState, &LyapAdmmState),
) -> Result<(SolveReport, LyapAdmmState)> {
    cfg.validate()?;
    let n = p.order();
    let mut state = match init {
        Some(s) => {
            s.check(n)?;
            s.clone()
        }
        None => LyapAdmmState::zeros(n),
    };
    let stepper = LyapStepper::new(p, cfg.alpha, cfg.beta)?;
    let mut report = ReportBuilder::new(p.residual(&state.x));
    let mut termination = Termination::MaxIterations;
    loop {
        let res = report.last();
        if res <= cfg.tol {
            termination = Termination::Converged;
            break;
        }
        if !res.is_finite() {
            termination = Termination::Diverged;
            break;
        }
        if report.iterations() == cfg.max_iterations {
            break;
        }
        let next = match stepper.step(&state) {
            Ok(s) => s,
            Err(e) => {
                return Err(Error::Aborted {
                    cause: Box::new(e),
                    partial: Box::new(report.finish(state.x.symmetrize(), Termination::Error)),
                })
            }
        };
        observe(&state, &next);
        state = next;
        report.step(p.residual(&state.x));
    }
    let sym = state.x.symmetrize();
    report.replace_last(p.residual(&sym));
    report.detail("asymmetry", state.x.asymmetry());
    Ok((report.finish(sym, termination), state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::solve_lyapunov_direct;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar() -> LyapunovProblem {
        LyapunovProblem::new(Matrix::scalar(-2.0), Matrix::scalar(3.0)).unwrap()
    }

    #[test]
    fn kkt_point_is_fixed() {
        let p = scalar();
        let s = LyapAdmmState::kkt_point(&p, &Matrix::scalar(0.75));
        assert_eq!(s.y, Matrix::scalar(-1.5));
        assert!(lyap_kkt_residuals(&p, &s).iter().all(|&r| r <= 1e-12));
        let cfg = LyapAdmmConfig { alpha: 1.0, beta: 1.0, ..Default::default() };
        let next = lyap_admm_step(&p, &s, &cfg).unwrap();
        assert!(next.max_abs_diff(&s) <= 1e-9);
    }

    #[test]
    fn first_step_from_zero() {
        let a = Matrix::from_rows(&[[-1.0, 0.5], [0.2, -2.0]]).unwrap();
        let q = Matrix::from_rows(&[[2.0, 0.3], [0.3, 1.0]]).unwrap();
        let p = LyapunovProblem::new(a.clone(), q.clone()).unwrap();
        let cfg = LyapAdmmConfig { alpha: 0.7, beta: 2.0, ..Default::default() };
        let s = lyap_admm_step(&p, &LyapAdmmState::zeros(2), &cfg).unwrap();
        assert_eq!(s.x.max_abs(), 0.0);
        let y1 = q.scale(-1.0 / 1.7);
        assert!((&s.y - &y1).max_abs() < 1e-15);
        let mut zsys = a.matmul_t(&a);
        zsys.add_diag(2.0);
        let z1 = crate::linalg::lu_solve(&zsys, &(-&(&y1 + &q)).matmul_t(&a).transpose()).unwrap().transpose();
        assert!((&s.z - &z1).max_abs() < 1e-14);
    }

    #[test]
    fn scalar_converges() {
        let cfg = LyapAdmmConfig { alpha: 1.0, beta: 1.0, ..Default::default() };
        let r = solve_lyapunov_admm(&scalar(), &cfg, None).unwrap();
        assert!(r.converged());
        assert!((r.solution[(0, 0)] - 0.75).abs() < 1e-8);
    }

    #[test]
    fn decoupled_and_zero() {
        let p = LyapunovProblem::new(Matrix::from_diag(&[-1.0, -2.0]), Matrix::identity(2)).unwrap();
        let cfg = LyapAdmmConfig { alpha: 1.0, beta: 1.0, ..Default::default() };
        let r = solve_lyapunov_admm(&p, &cfg, None).unwrap();
        assert!((&r.solution - &Matrix::from_diag(&[0.5, 0.25])).max_abs() < 1e-6);

        let p = LyapunovProblem::new(Matrix::from_diag(&[-1.0, -2.0]), Matrix::zeros(2, 2)).unwrap();
        let r = solve_lyapunov_admm(&p, &cfg, None).unwrap();
        assert!(r.converged());
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn matches_direct_on_random_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 2..=8 {
            let mut a = Matrix::from_fn(n, n, |_, _| rng.gen_range(-0.5..0.5));
            a.add_diag(-2.0);
            let q = {
                let m = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
                m.matmul_t(&m)
            };
            let p = LyapunovProblem::new(a, q.symmetrize()).unwrap();
            let cfg = LyapAdmmConfig { alpha: 1.0, beta: 2.0, tol: 1e-10, max_iterations: 20_000 };
            let mut violations = 0;
            let (r, _) = solve_lyapunov_admm_observed(&p, &cfg, None, |prev, next| {
                let drop = lyap_lagrangian_value(&p, prev, 1.0, 2.0) - lyap_lagrangian_value(&p, next, 1.0, 2.0);
                if drop < lyap_decrease_bound(prev, next, 1.0, 2.0) - 1e-8 {
                    violations += 1;
                }
            })
            .unwrap();
            assert!(r.converged(), "n={n}");
            assert_eq!(violations, 0);
            let direct = solve_lyapunov_direct(&p).unwrap();
            assert!((&r.solution - &direct).frobenius_norm() <= 1e-6, "n={n}");
        }
    }
}
