//! SVD and eigenvalue routines, delegated to nalgebra.

use nalgebra::DMatrix;

use super::Matrix;
use crate::error::{Error, Result};

/// Default relative cutoff for singular values in [`pseudo_inverse`].
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// Moore–Penrose inverse. Singular values below `rank_tol · σ_max` are
/// treated as zero.
pub fn pseudo_inverse(a: &Matrix, rank_tol: f64) -> Matrix {
    pseudo_inverse_with_rank(a, rank_tol).0
}

/// [`pseudo_inverse`] together with the numerical rank it kept.
pub fn pseudo_inverse_with_rank(a: &Matrix, rank_tol: f64) -> (Matrix, usize) {
    let (r, c) = a.shape();
    let svd = to_na(a).svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u.as_ref(), svd.v_t.as_ref()) else {
        unreachable!("svd computed with both factors");
    };
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = rank_tol * sigma_max;
    let mut out = Matrix::zeros(c, r);
    if sigma_max == 0.0 {
        return (out, 0);
    }
    let mut rank = 0;
    // A⁺ = V Σ⁺ Uᵀ
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            continue;
        }
        rank += 1;
        let inv = 1.0 / s;
        for i in 0..c {
            let vi = v_t[(k, i)] * inv;
            if vi == 0.0 {
                continue;
            }
            for j in 0..r {
                out[(i, j)] += vi * u[(j, k)];
            }
        }
    }
    (out, rank)
}

/// Eigenvalues of a general square matrix as `(re, im)` pairs.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<(f64, f64)>> {
    if !a.is_square() {
        return Err(Error::dim("eigenvalues of a non-square matrix"));
    }
    Ok(to_na(a).complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect())
}

/// Eigenvalues of the symmetric part of `a`, ascending.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::dim("eigenvalues of a non-square matrix"));
    }
    let s = to_na(&a.symmetrize());
    let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}
