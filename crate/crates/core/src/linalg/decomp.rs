use super::Matrix;
use crate::error::{Error, Result};

/// A pivot is treated as zero when `|pivot| < LU_PIVOT_RELATIVE_TOL · max|a|`.
pub const LU_PIVOT_RELATIVE_TOL: f64 = 1e-14;

/// LU factorization with partial pivoting, `P·A = L·U`, packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Lu> {
        if !a.is_square() {
            return Err(Error::dim(format!("LU of non-square {}x{}", a.rows(), a.cols())));
        }
        let n = a.rows();
        let scale = a.max_abs();
        if scale == 0.0 {
            return Err(Error::Singular("zero matrix".into()));
        }
        let threshold = LU_PIVOT_RELATIVE_TOL * scale;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let data = lu.as_mut_slice();

        for k in 0..n {
            let (mut p, mut best) = (k, data[k * n + k].abs());
            for i in k + 1..n {
                let v = data[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < threshold {
                return Err(Error::Singular(format!(
                    "pivot {best:e} at column {k} below {threshold:e}"
                )));
            }
            if p != k {
                for j in 0..n {
                    data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let (head, tail) = data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..];
            let pivot = pivot_row[k];
            for row in tail.chunks_exact_mut(n) {
                let l = row[k] / pivot;
                row[k] = l;
                if l != 0.0 {
                    for (r, u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *r -= l * u;
                    }
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn order(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        let n = self.order();
        if rhs.rows() != n {
            return Err(Error::dim(format!("rhs has {} rows, system has {n}", rhs.rows())));
        }
        let k = rhs.cols();
        let lu = self.lu.as_slice();
        let mut x = Matrix::zeros(n, k);
        {
            let xd = x.as_mut_slice();
            for (i, &p) in self.perm.iter().enumerate() {
                xd[i * k..(i + 1) * k].copy_from_slice(rhs.row(p));
            }
            // forward: unit lower triangle
            for i in 0..n {
                let (done, rest) = xd.split_at_mut(i * k);
                let xi = &mut rest[..k];
                for j in 0..i {
                    let l = lu[i * n + j];
                    if l != 0.0 {
                        for (a, b) in xi.iter_mut().zip(&done[j * k..(j + 1) * k]) {
                            *a -= l * b;
                        }
                    }
                }
            }
            // backward: upper triangle
            for i in (0..n).rev() {
                let (head, rest) = xd.split_at_mut((i + 1) * k);
                let xi = &mut head[i * k..];
                for j in i + 1..n {
                    let u = lu[i * n + j];
                    if u != 0.0 {
                        let xj = &rest[(j - i - 1) * k..(j - i) * k];
                        for (a, b) in xi.iter_mut().zip(xj) {
                            *a -= u * b;
                        }
                    }
                }
                let d = lu[i * n + i];
                xi.iter_mut().for_each(|v| *v /= d);
            }
        }
        Ok(x)
    }
}

/// Cholesky factor `A = L·Lᵀ` of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Only the lower triangle of `a` is read.
    pub fn factor(a: &Matrix) -> Result<Cholesky> {
        if !a.is_square() {
            return Err(Error::dim(format!("Cholesky of non-square {}x{}", a.rows(), a.cols())));
        }
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        let src = a.as_slice();
        let ld = l.as_mut_slice();
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..j).map(|p| ld[i * n + p] * ld[j * n + p]).sum();
                let v = src[i * n + j] - s;
                if i == j {
                    if v <= 0.0 || !v.is_finite() {
                        return Err(Error::NotPositiveDefinite { index: i, pivot: v });
                    }
                    ld[i * n + i] = v.sqrt();
                } else {
                    ld[i * n + j] = v / ld[j * n + j];
                }
            }
        }
        Ok(Cholesky { l })
    }

    pub fn factor_matrix(&self) -> &Matrix {
        &self.l
    }

    /// Solves `A·X = rhs`.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        let n = self.l.rows();
        if rhs.rows() != n {
            return Err(Error::dim(format!("rhs has {} rows, system has {n}", rhs.rows())));
        }
        let k = rhs.cols();
        let l = self.l.as_slice();
        let mut x = rhs.clone();
        let xd = x.as_mut_slice();
        for i in 0..n {
            let (done, rest) = xd.split_at_mut(i * k);
            let xi = &mut rest[..k];
            for j in 0..i {
                let c = l[i * n + j];
                if c != 0.0 {
                    for (a, b) in xi.iter_mut().zip(&done[j * k..(j + 1) * k]) {
                        *a -= c * b;
                    }
                }
            }
            let d = l[i * n + i];
            xi.iter_mut().for_each(|v| *v /= d);
        }
        for i in (0..n).rev() {
            let (head, rest) = xd.split_at_mut((i + 1) * k);
            let xi = &mut head[i * k..];
            for j in i + 1..n {
                let c = l[j * n + i];
                if c != 0.0 {
                    let xj = &rest[(j - i - 1) * k..(j - i) * k];
                    for (a, b) in xi.iter_mut().zip(xj) {
                        *a -= c * b;
                    }
                }
            }
            let d = l[i * n + i];
            xi.iter_mut().for_each(|v| *v /= d);
        }
        Ok(x)
    }

    /// Solves `X·A = rhs` using the symmetry of `A`.
    pub fn solve_right(&self, rhs: &Matrix) -> Result<Matrix> {
        Ok(self.solve(&rhs.transpose())?.transpose())
    }
}

pub fn lu_solve(a: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    Lu::factor(a)?.solve(rhs)
}

pub fn cholesky_solve(a: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    Cholesky::factor(a)?.solve(rhs)
}

/// Cholesky first, LU when the factorization reports a non-positive pivot.
pub fn spd_solve(a: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    match Cholesky::factor(a) {
        Ok(c) => c.solve(rhs),
        Err(Error::NotPositiveDefinite { .. }) => lu_solve(a, rhs),
        Err(e) => Err(e),
    }
}

/// A factored symmetric positive definite system, reusable across solves.
/// Falls back to LU when Cholesky meets a non-positive pivot.
#[derive(Debug, Clone)]
pub enum SpdFactor {
    Cholesky(Cholesky),
    Lu(Lu),
}

impl SpdFactor {
    pub fn factor(a: &Matrix) -> Result<SpdFactor> {
        match Cholesky::factor(a) {
            Ok(c) => Ok(SpdFactor::Cholesky(c)),
            Err(Error::NotPositiveDefinite { .. }) => Ok(SpdFactor::Lu(Lu::factor(a)?)),
            Err(e) => Err(e),
        }
    }

    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        match self {
            SpdFactor::Cholesky(c) => c.solve(rhs),
            SpdFactor::Lu(lu) => lu.solve(rhs),
        }
    }

    /// Solves `X·A = rhs`; `A` is symmetric, so this is `A·Xᵀ = rhsᵀ`.
    pub fn solve_right(&self, rhs: &Matrix) -> Result<Matrix> {
        Ok(self.solve(&rhs.transpose())?.transpose())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn lu_examples() {
        let b = Matrix::column(&[1.0, -2.0, 3.5]);
        assert_eq!(lu_solve(&Matrix::identity(3), &b).unwrap(), b);
        let x = lu_solve(&m(&[&[2.0, 0.0], &[0.0, 4.0]]), &Matrix::column(&[2.0, 8.0])).unwrap();
        assert_eq!(x, Matrix::column(&[1.0, 2.0]));
        let err = lu_solve(&m(&[&[1.0, 1.0], &[1.0, 1.0]]), &Matrix::column(&[1.0, 0.0]));
        assert!(matches!(err, Err(Error::Singular(_))));
    }

    #[test]
    fn lu_needs_pivoting() {
        let a = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let x = lu_solve(&a, &Matrix::column(&[3.0, 7.0])).unwrap();
        assert_eq!(x, Matrix::column(&[7.0, 3.0]));
    }

    #[test]
    fn cholesky_examples() {
        let x = cholesky_solve(&(Matrix::identity(2) * 4.0), &Matrix::column(&[8.0, 4.0])).unwrap();
        assert_eq!(x, Matrix::column(&[2.0, 1.0]));
        let x = cholesky_solve(&m(&[&[2.0, 1.0], &[1.0, 2.0]]), &Matrix::column(&[3.0, 3.0])).unwrap();
        assert!((&x - &Matrix::column(&[1.0, 1.0])).max_abs() < 1e-15);
        let err = cholesky_solve(&m(&[&[1.0, 2.0], &[2.0, 1.0]]), &Matrix::column(&[1.0, 1.0]));
        assert!(matches!(err, Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn spd_solve_falls_back_to_lu() {
        let a = m(&[&[1.0, 2.0], &[2.0, 1.0]]);
        let x = spd_solve(&a, &Matrix::column(&[3.0, 3.0])).unwrap();
        assert!((&x - &Matrix::column(&[1.0, 1.0])).max_abs() < 1e-14);
    }

    #[test]
    fn right_solve() {
        let a = m(&[&[4.0, 1.0], &[1.0, 3.0]]);
        let rhs = m(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let x = Cholesky::factor(&a).unwrap().solve_right(&rhs).unwrap();
        assert!((&(&x * &a) - &rhs).max_abs() < 1e-13);
    }

    #[test]
    fn lu_backward_error_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 17, 40] {
            // diagonally shifted keeps the condition number modest
            let mut a = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            a.add_diag(n as f64);
            let rhs = Matrix::from_fn(n, 3, |_, _| rng.gen_range(-5.0..5.0));
            let x = lu_solve(&a, &rhs).unwrap();
            let r = (&(&a * &x) - &rhs).frobenius_norm();
            assert!(r <= 1e-10 * (1.0 + rhs.frobenius_norm()), "n={n} r={r}");
        }
    }
}
