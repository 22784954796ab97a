//! Direct Kronecker solves and residuals; the reference every iterative
//! Sylvester solver is checked against.

use crate::error::Result;
use crate::linalg::{kron_capped, lu_solve, unvec, vec, Matrix, DEFAULT_KRON_CAP};
use crate::problems::SylvesterProblem;

/// `‖AX + XB − C‖_F`
pub fn sylvester_residual(p: &SylvesterProblem, x: &Matrix) -> Result<f64> {
    p.check_unknown(x)?;
    Ok(p.residual_matrix(x).frobenius_norm())
}

/// `M = Iₙ⊗A + Bᵀ⊗Iₘ`, so that `M·vec(X) = vec(AX + XB)`.
pub fn kronecker_operator(p: &SylvesterProblem, cap: usize) -> Result<Matrix> {
    let (m, n) = p.shape();
    let mut op = kron_capped(&Matrix::identity(n), p.a(), cap)?;
    op += &kron_capped(&p.b().transpose(), &Matrix::identity(m), cap)?;
    Ok(op)
}

pub fn solve_kronecker_direct(p: &SylvesterProblem) -> Result<Matrix> {
    solve_kronecker_direct_capped(p, DEFAULT_KRON_CAP)
}

pub fn solve_kronecker_direct_capped(p: &SylvesterProblem, cap: usize) -> Result<Matrix> {
    let (m, n) = p.shape();
    let op = kronecker_operator(p, cap)?;
    let x = lu_solve(&op, &vec(p.c()))?;
    unvec(&x, m, n)
}
