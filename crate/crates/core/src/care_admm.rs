//! Four-block ADMM for `AᵀX + XA − XNX + K = 0`.
//!
//! The equation is rewritten as
//!
//! ```text
//! min ½‖Y + ZA − WX + K‖²   s.t.  AᵀX = Y,  X = Z,  ZN = W
//! ```
//!
//! and each block of the augmented Lagrangian is minimized in closed form,
//! in the order X, Y, Z, W, followed by the multiplier updates for Λ, Π, Γ.

use serde::{Deserialize, Serialize};

use crate::baselines::care_residual;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, SpdFactor};
use crate::problems::CareProblem;
use crate::report::{ReportBuilder, SolveReport, Termination};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmState {
    pub x: Matrix,
    pub y: Matrix,
    pub z: Matrix,
    pub w: Matrix,
    pub lambda: Matrix,
    pub pi: Matrix,
    pub gamma: Matrix,
}

impl AdmmState {
    pub fn zeros(n: usize) -> Self {
        let z = Matrix::zeros(n, n);
        Self { x: z.clone(), y: z.clone(), z: z.clone(), w: z.clone(), lambda: z.clone(), pi: z.clone(), gamma: z }
    }

    /// The feasible point `(X, AᵀX, X, XN)` with zero multipliers. When `X`
    /// solves the CARE this satisfies every KKT condition.
    pub fn kkt_point(p: &CareProblem, x: &Matrix) -> Self {
        let zero = Matrix::zeros(p.order(), p.order());
        Self {
            x: x.clone(),
            y: p.a().t_matmul(x),
            z: x.clone(),
            w: x * p.n_mat(),
            lambda: zero.clone(),
            pi: zero.clone(),
            gamma: zero,
        }
    }

    fn blocks(&self) -> [&Matrix; 7] {
        [&self.x, &self.y, &self.z, &self.w, &self.lambda, &self.pi, &self.gamma]
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.blocks().iter().any(|b| b.shape() != (n, n)) {
            return Err(Error::dim(format!("every ADMM block must be {n}x{n}")));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.is_finite())
    }

    /// Largest entrywise difference over all seven blocks.
    pub fn max_abs_diff(&self, other: &AdmmState) -> f64 {
        self.blocks()
            .iter()
            .zip(other.blocks())
            .map(|(a, b)| (*a - b).max_abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdmmConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Stop once the CARE residual is at or below this.
    pub tol: f64,
    pub max_iterations: usize,
    /// The residual is evaluated every `check_every` iterations.
    pub check_every: usize,
    /// Record the augmented Lagrangian at every check in `detail["lagrangian"]`.
    pub track_lagrangian: bool,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 10.0,
            gamma: 0.05,
            tol: 1e-8,
            max_iterations: 50_000,
            check_every: 1,
            track_lagrangian: false,
        }
    }
}

impl AdmmConfig {
    pub fn with_penalties(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma), ("tol", self.tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.check_every == 0 {
            return Err(Error::Config("check_every must be at least 1".into()));
        }
        Ok(())
    }
}

fn breakdown(what: &str, e: Error) -> Error {
    Error::Breakdown(format!("{what} system: {e}"))
}

/// Per-problem data reused across iterations.
struct Stepper<'a> {
    p: &'a CareProblem,
    cfg: &'a AdmmConfig,
    aat: Matrix,
    z_system: SpdFactor,
}

impl<'a> Stepper<'a> {
    fn new(p: &'a CareProblem, cfg: &'a AdmmConfig) -> Result<Self> {
        let a = p.a();
        let aat = a.matmul_t(a);
        // AAᵀ + βI + γNNᵀ does not depend on the iterate
        let mut zs = aat.clone();
        zs.add_diag(cfg.beta);
        zs.axpy(cfg.gamma, &p.n_mat().matmul_t(p.n_mat()));
        let z_system = SpdFactor::factor(&zs.symmetrize()).map_err(|e| breakdown("Z", e))?;
        Ok(Self { p, cfg, aat, z_system })
    }

    fn step(&self, s: &AdmmState) -> Result<AdmmState> {
        let (p, cfg) = (self.p, self.cfg);
        let (a, n_mat, k) = (p.a(), p.n_mat(), p.k_mat());
        let (alpha, beta, gamma) = (cfg.alpha, cfg.beta, cfg.gamma);
        let n = p.order();

        // X: [WᵀW + αAAᵀ + βI] X = Wᵀ(Y + ZA + K) + AΛ + Π + αAY + βZ
        let za = &s.z * a;
        let mut yzak = &s.y + &za;
        yzak += k;
        let mut lhs = s.w.t_matmul(&s.w);
        lhs.axpy(alpha, &self.aat);
        lhs.add_diag(beta);
        let mut rhs = s.w.t_matmul(&yzak);
        rhs += &(a * &s.lambda);
        rhs += &s.pi;
        rhs.axpy(alpha, &(a * &s.y));
        rhs.axpy(beta, &s.z);
        let x = SpdFactor::factor(&lhs.symmetrize())
            .and_then(|f| f.solve(&rhs))
            .map_err(|e| breakdown("X", e))?;

        // Y = (1 + α)⁻¹ [WX + αAᵀX − ZA − K − Λ]
        let wx = &s.w * &x;
        let atx = a.t_matmul(&x);
        let mut y = wx.clone();
        y.axpy(alpha, &atx);
        y -= &za;
        y -= k;
        y -= &s.lambda;
        let y = y.scale(1.0 / (1.0 + alpha));

        // Z [AAᵀ + βI + γNNᵀ] = (WX − Y − K)Aᵀ − Π + ΓNᵀ + βX + γWNᵀ
        let mut t = &wx - &y;
        t -= k;
        let mut rhs = t.matmul_t(a);
        rhs -= &s.pi;
        rhs += &s.gamma.matmul_t(n_mat);
        rhs.axpy(beta, &x);
        rhs.axpy(gamma, &s.w.matmul_t(n_mat));
        let z = self.z_system.solve_right(&rhs).map_err(|e| breakdown("Z", e))?;

        // W [XXᵀ + γI] = (Y + ZA + K)Xᵀ − Γ + γZN
        let zn = &z * n_mat;
        let mut u = &y + &(&z * a);
        u += k;
        let mut rhs = u.matmul_t(&x);
        rhs -= &s.gamma;
        rhs.axpy(gamma, &zn);
        let mut ws = x.matmul_t(&x);
        ws.add_diag(gamma);
        let w = SpdFactor::factor(&ws.symmetrize())
            .and_then(|f| f.solve_right(&rhs))
            .map_err(|e| breakdown("W", e))?;

        let mut lambda = s.lambda.clone();
        lambda.axpy(-alpha, &(&atx - &y));
        let mut pi = s.pi.clone();
        pi.axpy(-beta, &(&x - &z));
        let mut gamma_m = s.gamma.clone();
        gamma_m.axpy(-gamma, &(&zn - &w));
        debug_assert_eq!(x.shape(), (n, n));
        Ok(AdmmState { x, y, z, w, lambda, pi, gamma: gamma_m })
    }
}

/// One sweep X → Y → Z → W → Λ → Π → Γ.
pub fn admm_step(p: &CareProblem, s: &AdmmState, cfg: &AdmmConfig) -> Result<AdmmState> {
    cfg.validate()?;
    s.check(p.order())?;
    Stepper::new(p, cfg)?.step(s)
}

/// Frobenius norms of the seven KKT left-hand sides: stationarity in X, Y,
/// Z, W, then the gaps `AᵀX − Y`, `X − Z`, `ZN − W`.
pub fn kkt_residuals(p: &CareProblem, s: &AdmmState) -> [f64; 7] {
    let (a, n_mat, k) = (p.a(), p.n_mat(), p.k_mat());
    let wx = &s.w * &s.x;
    let za = &s.z * a;
    let mut yzak = &s.y + &za;
    yzak += k;

    let mut r1 = s.w.t_matmul(&wx);
    r1 -= &s.w.t_matmul(&yzak);
    r1 -= &(a * &s.lambda);
    r1 -= &s.pi;

    let mut r2 = &yzak - &wx;
    r2 += &s.lambda;

    let mut t = &s.y - &wx;
    t += k;
    let mut r3 = (&s.z * a).matmul_t(a);
    r3 += &t.matmul_t(a);
    r3 += &s.pi;
    r3 -= &s.gamma.matmul_t(n_mat);

    let mut r4 = wx.matmul_t(&s.x);
    r4 -= &yzak.matmul_t(&s.x);
    r4 += &s.gamma;

    let r5 = &a.t_matmul(&s.x) - &s.y;
    let r6 = &s.x - &s.z;
    let r7 = &(&s.z * n_mat) - &s.w;
    [r1, r2, r3, r4, r5, r6, r7].map(|r| r.frobenius_norm())
}

/// The augmented Lagrangian
/// `½‖Y+ZA−WX+K‖² − ⟨Λ,AᵀX−Y⟩ − ⟨Π,X−Z⟩ − ⟨Γ,ZN−W⟩ + α/2‖AᵀX−Y‖² + β/2‖X−Z‖² + γ/2‖ZN−W‖²`.
pub fn lagrangian_value(p: &CareProblem, s: &AdmmState, cfg: &AdmmConfig) -> f64 {
    let a = p.a();
    let mut e = &s.y + &(&s.z * a);
    e -= &(&s.w * &s.x);
    e += p.k_mat();
    let g1 = &a.t_matmul(&s.x) - &s.y;
    let g2 = &s.x - &s.z;
    let g3 = &(&s.z * p.n_mat()) - &s.w;
    0.5 * dot(&e, &e) - dot(&s.lambda, &g1) - dot(&s.pi, &g2) - dot(&s.gamma, &g3)
        + 0.5 * cfg.alpha * dot(&g1, &g1)
        + 0.5 * cfg.beta * dot(&g2, &g2)
        + 0.5 * cfg.gamma * dot(&g3, &g3)
}

/// Lower bound on `L(prev) − L(next)` for one sweep:
/// `β/2‖ΔX‖² + α/2‖ΔY‖² + β/2‖ΔZ‖² + γ/2‖ΔW‖² − ‖ΔΛ‖²/α − ‖ΔΠ‖²/β − ‖ΔΓ‖²/γ`.
pub fn decrease_bound(prev: &AdmmState, next: &AdmmState, cfg: &AdmmConfig) -> f64 {
    let sq = |a: &Matrix, b: &Matrix| {
        let d = a - b;
        dot(&d, &d)
    };
    let (al, be, ga) = (cfg.alpha, cfg.beta, cfg.gamma);
    0.5 * be * sq(&prev.x, &next.x) + 0.5 * al * sq(&prev.y, &next.y) + 0.5 * be * sq(&prev.z, &next.z)
        + 0.5 * ga * sq(&prev.w, &next.w)
        - sq(&prev.lambda, &next.lambda) / al
        - sq(&prev.pi, &next.pi) / be
        - sq(&prev.gamma, &next.gamma) / ga
}

pub fn solve_care_admm(p: &CareProblem, cfg: &AdmmConfig, init: Option<&AdmmState>) -> Result<SolveReport> {
    solve_care_admm_observed(p, cfg, init, |_, _| {})
}

/// Runs ADMM from `init` (the zero state when `None`), calling
/// `observe(previous, next)` after every sweep.
///
/// `detail` carries the final seven KKT residuals, `‖X − Xᵀ‖_F`, and the
/// running sum of multiplier step norms.
pub fn solve_care_admm_observed(
    p: &CareProblem,
    cfg: &AdmmConfig,
    init: Option<&AdmmState>,
    mut observe: impl FnMut(&AdmmState, &AdmmState),
) -> Result<SolveReport> {
    cfg.validate()?;
    let n = p.order();
    let mut state = match init {
        Some(s) => {
            s.check(n)?;
            s.clone()
        }
        None => AdmmState::zeros(n),
    };
    let stepper = Stepper::new(p, cfg)?;
    let mut report = ReportBuilder::new(care_residual(p, &state.x)?);
    let mut lagrangian = Vec::new();
    if cfg.track_lagrangian {
        lagrangian.push(lagrangian_value(p, &state, cfg));
    }
    let mut multiplier_steps = 0.0;
    let mut termination = Termination::MaxIterations;
    if report.last() <= cfg.tol {
        termination = Termination::Converged;
    }
    while termination != Termination::Converged && report.iterations() < cfg.max_iterations {
        let next = match stepper.step(&state) {
            Ok(s) => s,
            Err(e) => {
                return Err(Error::Aborted {
                    cause: Box::new(e),
                    partial: Box::new(report.finish(state.x, Termination::Error)),
                })
            }
        };
        observe(&state, &next);
        multiplier_steps += (&next.lambda - &state.lambda).frobenius_norm()
            + (&next.pi - &state.pi).frobenius_norm()
            + (&next.gamma - &state.gamma).frobenius_norm();
        state = next;
        let k = report.iterations() + 1;
        if k % cfg.check_every == 0 || k == cfg.max_iterations {
            let res = care_residual(p, &state.x)?;
            report.step(res);
            if cfg.track_lagrangian {
                lagrangian.push(lagrangian_value(p, &state, cfg));
            }
            if res <= cfg.tol {
                termination = Termination::Converged;
            } else if !res.is_finite() || !state.is_finite() {
                termination = Termination::Diverged;
                break;
            }
        } else {
            report.skip(1);
        }
    }
    report.detail("kkt_residuals", kkt_residuals(p, &state).to_vec());
    report.detail("asymmetry", state.x.asymmetry());
    report.detail("multiplier_step_sum", multiplier_steps);
    report.detail("check_every", cfg.check_every);
    if cfg.track_lagrangian {
        report.detail("lagrangian", lagrangian);
    }
    Ok(report.finish(state.x, termination))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::solve_lyapunov_direct;
    use crate::problems::{ammonia_reactor, LyapunovProblem};

    const SCALAR_ROOT: f64 = 0.135_406_592_285_380_16;

    fn scalar() -> CareProblem {
        CareProblem::new(Matrix::scalar(-2.0), Matrix::scalar(25.0), Matrix::scalar(1.0)).unwrap()
    }

    #[test]
    fn kkt_point_is_fixed() {
        let p = scalar();
        let s = AdmmState::kkt_point(&p, &Matrix::scalar(SCALAR_ROOT));
        assert!(kkt_residuals(&p, &s).iter().all(|&r| r <= 1e-9));
        let cfg = AdmmConfig::with_penalties(1.0, 1.0, 0.01);
        let next = admm_step(&p, &s, &cfg).unwrap();
        assert!(next.max_abs_diff(&s) <= 1e-9);
    }

    #[test]
    fn first_step_from_zero() {
        let p = ammonia_reactor();
        let cfg = AdmmConfig::with_penalties(0.5, 10.0, 0.05);
        let s = admm_step(&p, &AdmmState::zeros(9), &cfg).unwrap();
        assert_eq!(s.x.max_abs(), 0.0);
        let expect = p.k_mat().scale(-1.0 / 1.5);
        assert!((&s.y - &expect).max_abs() < 1e-15);
    }

    #[test]
    fn zero_state_kkt_on_ammonia() {
        let p = ammonia_reactor();
        let r = kkt_residuals(&p, &AdmmState::zeros(9));
        assert_eq!(&r[4..], &[0.0, 0.0, 0.0]);
        assert_eq!(r[1], 3.0);
        let cfg = AdmmConfig::default();
        assert_eq!(lagrangian_value(&p, &AdmmState::zeros(9), &cfg), 4.5);
    }

    #[test]
    fn scalar_run_reaches_root() {
        let p = scalar();
        let cfg = AdmmConfig::with_penalties(1.0, 1.0, 0.01);
        let r = solve_care_admm(&p, &cfg, None).unwrap();
        assert!(r.converged(), "{:?} after {}", r.termination, r.iterations);
        assert!((r.solution[(0, 0)] - SCALAR_ROOT).abs() < 1e-8);
    }

    #[test]
    fn linear_case_matches_lyapunov() {
        let a = Matrix::from_rows(&[[-2.0, 0.5, 0.0], [0.3, -1.5, 0.2], [0.0, 0.4, -1.0]]).unwrap();
        let k = Matrix::from_rows(&[[2.0, 0.5, 0.0], [0.5, 1.0, 0.1], [0.0, 0.1, 1.0]]).unwrap();
        let p = CareProblem::new(a.clone(), Matrix::zeros(3, 3), k.clone()).unwrap();
        let cfg = AdmmConfig::with_penalties(1.0, 1.0, 0.1);
        let r = solve_care_admm(&p, &cfg, None).unwrap();
        assert!(r.converged());
        let direct = solve_lyapunov_direct(&LyapunovProblem::new(a, k).unwrap()).unwrap();
        assert!((&r.solution - &direct).frobenius_norm() <= 1e-6);
    }

    #[test]
    fn lagrangian_spot_value() {
        let p = scalar();
        let s = AdmmState {
            x: Matrix::scalar(0.5),
            y: Matrix::scalar(0.2),
            z: Matrix::scalar(0.4),
            w: Matrix::scalar(3.0),
            lambda: Matrix::scalar(0.1),
            pi: Matrix::scalar(-0.2),
            gamma: Matrix::scalar(0.3),
        };
        let cfg = AdmmConfig::with_penalties(2.0, 3.0, 0.5);
        // residual 0.2 − 0.8 − 1.5 + 1 = −1.1; gaps −1.2, 0.1, 7
        let expect = 0.5 * 1.21 - 0.1 * -1.2 - -0.2 * 0.1 - 0.3 * 7.0 + 1.0 * 1.44 + 1.5 * 0.01 + 0.25 * 49.0;
        assert!((lagrangian_value(&p, &s, &cfg) - expect).abs() < 1e-12);
    }

    #[test]
    fn decrease_and_multiplier_identities() {
        let p = scalar();
        let cfg = AdmmConfig::with_penalties(1.0, 1.0, 0.01);
        let mut violations = 0;
        solve_care_admm_observed(&p, &cfg, None, |prev, next| {
            let drop = lagrangian_value(&p, prev, &cfg) - lagrangian_value(&p, next, &cfg);
            if drop < decrease_bound(prev, next, &cfg) - 1e-8 {
                violations += 1;
            }
            let expect = &prev.lambda - &(&p.a().t_matmul(&next.x) - &next.y).scale(cfg.alpha);
            assert!((&next.lambda - &expect).max_abs() <= 1e-12 * (1.0 + expect.max_abs()));
        })
        .unwrap();
        assert_eq!(violations, 0);
    }

    #[test]
    fn strided_history() {
        let p = scalar();
        let cfg = AdmmConfig { check_every: 5, ..AdmmConfig::with_penalties(1.0, 1.0, 0.01) };
        let r = solve_care_admm(&p, &cfg, None).unwrap();
        assert!(r.converged());
        assert_eq!(r.iterations % 5, 0);
        assert_eq!(r.residual_history.len(), r.iterations / 5 + 1);
    }

    #[test]
    fn rejects_nonpositive_penalty() {
        let cfg = AdmmConfig::with_penalties(0.0, 1.0, 1.0);
        assert!(matches!(solve_care_admm(&scalar(), &cfg, None), Err(Error::Config(_))));
    }
}
