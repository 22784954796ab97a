use super::Matrix;
use crate::error::{Error, Result};

/// Default limit on the number of entries of a Kronecker product (a 4096×4096 output).
pub const DEFAULT_KRON_CAP: usize = 4096 * 4096;

pub fn kron(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    kron_capped(a, b, DEFAULT_KRON_CAP)
}

/// `a ⊗ b = (a_ij · b)`, refusing outputs with more than `cap` entries.
pub fn kron_capped(a: &Matrix, b: &Matrix, cap: usize) -> Result<Matrix> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    let requested = rows.zip(cols).and_then(|(r, c)| r.checked_mul(c)).unwrap_or(usize::MAX);
    if requested > cap {
        return Err(Error::Capacity { requested, cap });
    }
    let (rows, cols) = (a.rows() * b.rows(), a.cols() * b.cols());
    let mut out = Matrix::zeros(rows, cols);
    let (br, bc) = b.shape();
    let od = out.as_mut_slice();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let s = a[(i, j)];
            if s == 0.0 {
                continue;
            }
            for p in 0..br {
                let row = (i * br + p) * cols + j * bc;
                for (o, v) in od[row..row + bc].iter_mut().zip(b.row(p)) {
                    *o = s * v;
                }
            }
        }
    }
    Ok(out)
}

/// Column-stacking vectorization: `(x11, x21, …, xm1, x12, …, xmn)ᵀ`.
pub fn vec(m: &Matrix) -> Matrix {
    let (r, c) = m.shape();
    let mut v = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            v.push(m[(i, j)]);
        }
    }
    Matrix::column(&v)
}

/// Inverse of [`vec`].
pub fn unvec(v: &Matrix, rows: usize, cols: usize) -> Result<Matrix> {
    if v.cols() != 1 || v.rows() != rows * cols {
        return Err(Error::dim(format!(
            "cannot unvec a {}x{} matrix into {rows}x{cols}",
            v.rows(),
            v.cols()
        )));
    }
    let s = v.as_slice();
    Ok(Matrix::from_fn(rows, cols, |i, j| s[j * rows + i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kron_examples() {
        assert_eq!(kron(&Matrix::identity(2), &Matrix::identity(2)).unwrap(), Matrix::identity(4));
        let a = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let b = Matrix::column(&[3.0, 4.0]);
        let expect = Matrix::from_rows(&[[3.0, 6.0], [4.0, 8.0]]).unwrap();
        assert_eq!(kron(&a, &b).unwrap(), expect);
    }

    #[test]
    fn kron_capacity_guard() {
        let a = Matrix::identity(10);
        assert!(matches!(
            kron_capped(&a, &a, 9_999),
            Err(Error::Capacity { requested: 10_000, cap: 9_999 })
        ));
        assert!(kron_capped(&a, &a, 10_000).is_ok());
    }

    /// Brute-force check of vec(AXB) = (Bᵀ ⊗ A) vec(X).
    #[test]
    fn vec_kron_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut r = || Matrix::from_fn(3, 3, |_, _| rng.gen_range(-2.0..2.0));
        let (a, x, b) = (r(), r(), r());
        let lhs = vec(&(&(&a * &x) * &b));
        let rhs = &kron(&b.transpose(), &a).unwrap() * &vec(&x);
        assert!((&lhs - &rhs).frobenius_norm() <= 1e-12 * x.frobenius_norm());
    }

    #[test]
    fn vec_examples() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(vec(&m), Matrix::column(&[1.0, 3.0, 2.0, 4.0]));
        assert_eq!(vec(&Matrix::scalar(2.5)), Matrix::scalar(2.5));
        let r = Matrix::from_fn(5, 7, |i, j| (i * 7 + j) as f64 * 0.25);
        assert_eq!(unvec(&vec(&r), 5, 7).unwrap(), r);
        assert!(matches!(unvec(&vec(&r), 7, 4), Err(Error::Dimension(_))));
    }
}
