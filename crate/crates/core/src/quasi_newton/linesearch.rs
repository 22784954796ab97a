//! Step-length rules on a one-dimensional profile `φ(α) = f(x + α·d)`.
//!
//! Callers pass `phi(α) -> (φ(α), φ'(α))` where `φ'(α) = ⟨∇f(x + α·d), d⟩`.

use crate::error::{Error, Result};

/// Trial budget shared by the bracketing and zoom phases.
pub const MAX_TRIALS: usize = 60;

fn sufficient_decrease(phi_a: f64, phi0: f64, alpha: f64, slope0: f64, sigma1: f64) -> bool {
    phi_a <= phi0 + sigma1 * alpha * slope0
}

/// Returns `α` satisfying both conditions
///
/// `φ(α) ≤ φ(0) + σ₁·α·φ'(0)` and `φ'(α) ≥ σ₂·φ'(0)`,
///
/// by bracketing from `α = 1` (doubling) and zooming inside the bracket with
/// safeguarded quadratic interpolation.
pub fn wolfe_search_fn(
    mut phi: impl FnMut(f64) -> (f64, f64),
    sigma1: f64,
    sigma2: f64,
) -> Result<f64> {
    if !(0.0 < sigma1 && sigma1 < 0.5 && sigma1 < sigma2 && sigma2 < 1.0) {
        return Err(Error::Config(format!("need 0 < sigma1 < 0.5 and sigma1 < sigma2 < 1, got {sigma1}, {sigma2}")));
    }
    let (phi0, slope0) = phi(0.0);
    if !(slope0 < 0.0) {
        return Err(Error::Precondition(format!("not a descent direction (slope {slope0:e})")));
    }
    let mut trials = 0;
    let accept = |a: f64, pa: f64, da: f64| sufficient_decrease(pa, phi0, a, slope0, sigma1) && da >= sigma2 * slope0;

    let (mut lo, mut phi_lo, mut slope_lo, mut hi, mut phi_hi);
    let (mut a_prev, mut phi_prev, mut slope_prev) = (0.0, phi0, slope0);
    let mut alpha = 1.0;
    loop {
        if trials == MAX_TRIALS {
            return Err(Error::LinesearchFailed(format!("no bracket after {MAX_TRIALS} trials")));
        }
        trials += 1;
        let (pa, da) = phi(alpha);
        if !pa.is_finite() || !sufficient_decrease(pa, phi0, alpha, slope0, sigma1) || (trials > 1 && pa >= phi_prev) {
            (lo, phi_lo, slope_lo, hi, phi_hi) = (a_prev, phi_prev, slope_prev, alpha, pa);
            break;
        }
        if da >= sigma2 * slope0 {
            return Ok(alpha);
        }
        if da >= 0.0 {
            (lo, phi_lo, slope_lo, hi, phi_hi) = (alpha, pa, da, a_prev, phi_prev);
            break;
        }
        (a_prev, phi_prev, slope_prev) = (alpha, pa, da);
        alpha *= 2.0;
    }

    while trials < MAX_TRIALS {
        trials += 1;
        let a = zoom_trial(lo, phi_lo, slope_lo, hi, phi_hi);
        let (pa, da) = phi(a);
        if !pa.is_finite() || !sufficient_decrease(pa, phi0, a, slope0, sigma1) || pa >= phi_lo {
            (hi, phi_hi) = (a, pa);
        } else {
            if accept(a, pa, da) {
                return Ok(a);
            }
            if da * (hi - lo) >= 0.0 {
                (hi, phi_hi) = (lo, phi_lo);
            }
            (lo, phi_lo, slope_lo) = (a, pa, da);
        }
    }
    Err(Error::LinesearchFailed(format!("zoom did not satisfy the Wolfe conditions in {MAX_TRIALS} trials")))
}

/// Minimizer of the quadratic through `φ(lo)`, `φ'(lo)` and `φ(hi)`, kept
/// away from the bracket ends; bisection when the fit is not convex.
fn zoom_trial(lo: f64, phi_lo: f64, slope_lo: f64, hi: f64, phi_hi: f64) -> f64 {
    let w = hi - lo;
    let curv = phi_hi - phi_lo - slope_lo * w;
    let mid = lo + 0.5 * w;
    if !(curv > 0.0) || !phi_hi.is_finite() {
        return mid;
    }
    let t = (-slope_lo * w / (2.0 * curv)).clamp(1e-3, 1.0 - 1e-3);
    let a = lo + t * w;
    if a.is_finite() { a } else { mid }
}

/// Backtracking from `α = 1`, halving until `φ(α) ≤ φ(0) + σ₁·α·φ'(0)`.
///
/// Sufficient decrease alone does not guarantee global convergence of the
/// quasi-Newton iteration; runs using it may stall.
pub fn armijo_search_fn(mut phi: impl FnMut(f64) -> f64, slope0: f64, sigma1: f64) -> Result<f64> {
    if !(slope0 < 0.0) {
        return Err(Error::Precondition(format!("not a descent direction (slope {slope0:e})")));
    }
    let phi0 = phi(0.0);
    let mut alpha = 1.0;
    for _ in 0..MAX_TRIALS {
        if sufficient_decrease(phi(alpha), phi0, alpha, slope0, sigma1) {
            return Ok(alpha);
        }
        alpha *= 0.5;
    }
    Err(Error::LinesearchFailed(format!("no sufficient decrease after {MAX_TRIALS} halvings")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_step_on_shifted_quadratic() {
        // φ(α) = ½(α − 1)², φ'(0) = −1
        let a = wolfe_search_fn(|a| (0.5 * (a - 1.0) * (a - 1.0), a - 1.0), 0.25, 0.75).unwrap();
        assert_eq!(a, 1.0);
    }

    #[test]
    fn rejects_ascent_direction() {
        let err = wolfe_search_fn(|a| (a, 1.0), 1e-4, 0.9);
        assert!(matches!(err, Err(Error::Precondition(_))));
        assert!(matches!(armijo_search_fn(|a| a, 1.0, 1e-4), Err(Error::Precondition(_))));
    }

    #[test]
    fn expands_and_zooms() {
        for scale in [1e-3, 0.3, 7.0, 1e3] {
            // minimum at α = scale
            let phi = |a: f64| (0.5 * (a - scale).powi(2), a - scale);
            let a = wolfe_search_fn(phi, 1e-4, 0.9).unwrap();
            let (p0, d0) = phi(0.0);
            let (pa, da) = phi(a);
            assert!(pa <= p0 + 1e-4 * a * d0);
            assert!(da >= 0.9 * d0);
        }
    }

    #[test]
    fn finds_tiny_steps() {
        let scale = 1e-22;
        let phi = |a: f64| (0.5 * (a - scale).powi(2) / (scale * scale), (a - scale) / (scale * scale));
        let a = wolfe_search_fn(phi, 1e-4, 0.9).unwrap();
        assert!(a > 0.0 && a < 2.0 * scale);
    }

    #[test]
    fn armijo_halves() {
        // φ(α) = ½(α − 0.1)²: α = 1 fails, 0.125 passes
        let a = armijo_search_fn(|a| 0.5 * (a - 0.1) * (a - 0.1), -0.1, 1e-4).unwrap();
        assert_eq!(a, 0.125);
    }

    #[test]
    fn unbounded_profile_fails() {
        let err = wolfe_search_fn(|a| (-a, -1.0), 1e-4, 0.9);
        assert!(matches!(err, Err(Error::LinesearchFailed(_))));
    }
}
