//! Optimization-based solvers for linear and quadratic matrix equations.
//!
//! Sylvester equations `AX + XB = C` are handled by an iteratively reweighted
//! ℓ2,1 method ([`ccom`]) and by matrix-form DFP/BFGS ([`quasi_newton`]).
//! Continuous algebraic Riccati equations `AᵀX + XA − XNX + K = 0` are solved
//! by a four-block ADMM ([`care_admm`]) and by Newton's method with an inner
//! three-block ADMM Lyapunov solver ([`newton_admm`]). Direct Kronecker
//! solvers ([`sylvester_oracle`], [`baselines`]) act as ground truth, and
//! [`harness`] drives the CLI and benchmark suites.

pub mod baselines;
pub mod care_admm;
pub mod ccom;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod newton_admm;
pub mod problems;
pub mod quasi_newton;
pub mod report;
pub mod sylvester_oracle;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use problems::{CareProblem, LyapunovProblem, ProblemSource, SylvesterProblem};
pub use report::{SolveReport, Termination};
