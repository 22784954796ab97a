use crate::error::Result;
use crate::linalg::{kron_capped, lu_solve, unvec, vec, Matrix, DEFAULT_KRON_CAP};
use crate::problems::LyapunovProblem;

/// Solves `AᵀX + XA + Q = 0` through `(Iₙ⊗Aᵀ + Aᵀ⊗Iₙ)vec(X) = −vec(Q)` and
/// returns the symmetric part of the solution.
pub fn solve_lyapunov_direct(p: &LyapunovProblem) -> Result<Matrix> {
    solve_lyapunov_direct_capped(p, DEFAULT_KRON_CAP)
}

pub fn solve_lyapunov_direct_capped(p: &LyapunovProblem, cap: usize) -> Result<Matrix> {
    let n = p.order();
    let at = p.a().transpose();
    let eye = Matrix::identity(n);
    let mut op = kron_capped(&eye, &at, cap)?;
    op += &kron_capped(&at, &eye, cap)?;
    let x = lu_solve(&op, &-vec(p.q()))?;
    Ok(unvec(&x, n, n)?.symmetrize())
}
