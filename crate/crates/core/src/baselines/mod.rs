//! Comparison solvers: conjugate gradient and Anderson-accelerated
//! Richardson for Sylvester equations, and exact Newton for CARE built on a
//! direct Lyapunov solve.

mod anderson;
mod cg;
mod lyapunov;
mod newton;

use serde::{Deserialize, Serialize};

pub use anderson::solve_anderson_richardson;
pub use cg::{solve_cg, solve_cg_observed};
pub use lyapunov::{solve_lyapunov_direct, solve_lyapunov_direct_capped};
pub use newton::{care_residual, solve_newton_care, solve_newton_care_observed, NewtonConfig};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub tol: f64,
    pub max_iterations: usize,
    /// Richardson damping; `None` picks `1/(‖A‖₁ + ‖B‖₁)`.
    pub richardson_omega: Option<f64>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iterations: 1000, richardson_omega: None }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        if let Some(w) = self.richardson_omega {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Config("richardson_omega must be positive".into()));
            }
        }
        Ok(())
    }
}
