use super::{CareProblem, LyapunovProblem, SylvesterProblem};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Registered generator families. `t2` shares `t1`'s matrices and `ammonia`
/// is an alias for `t7`.
pub const GENERATOR_NAMES: &[&str] =
    &["t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8", "t9", "t10", "ammonia"];

/// Constant-band tridiagonal matrix: `diag` on the diagonal, `sub` below it
/// and `sup` above it.
pub fn gen_tridiagonal(n: usize, diag: f64, sub: f64, sup: f64) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag;
        if i + 1 < n {
            m[(i + 1, i)] = sub;
            m[(i, i + 1)] = sup;
        }
    }
    m
}

/// Sylvester families with `C = I`.
pub fn sylvester_family(name: &str, n: usize) -> Result<SylvesterProblem> {
    if n == 0 {
        return Err(Error::Config("order must be positive".into()));
    }
    let (a, b) = match name {
        "t1" | "t2" => (gen_tridiagonal(n, 2.0, -4.0, -4.0), gen_tridiagonal(n, 1.0, 3.0, 3.0)),
        "t3" => (Matrix::identity(n) * 2.0, Matrix::identity(n)),
        "t4" => (gen_tridiagonal(n, 2.0, -1.0, -1.0), gen_tridiagonal(n, 4.0, 1.0, 1.0)),
        "t5" => (gen_tridiagonal(n, 3.0, -2.0, -2.0), gen_tridiagonal(n, 6.0, 2.0, 2.0)),
        "t6" => (gen_tridiagonal(n, 5.0, -1.0, -1.0), gen_tridiagonal(n, 6.0, 2.0, 2.0)),
        other if GENERATOR_NAMES.contains(&other) => {
            return Err(Error::Config(format!("'{other}' is a Riccati family, not a Sylvester one")))
        }
        other => return Err(Error::NotFound(format!("generator '{other}'"))),
    };
    SylvesterProblem::new(a, b, Matrix::identity(n))
}

/// Riccati families with `N = BBᵀ` and `K = I`. The examples list `Bᵀ`, so
/// the band values below describe `Bᵀ`.
pub fn care_family(name: &str, n: usize) -> Result<CareProblem> {
    if n == 0 {
        return Err(Error::Config("order must be positive".into()));
    }
    let (a, b_t) = match name {
        "t7" | "ammonia" => {
            if n != 9 {
                return Err(Error::Config(format!("the ammonia reactor has order 9, not {n}")));
            }
            return Ok(ammonia_reactor());
        }
        "t8" | "t9" => (gen_tridiagonal(n, 6.0, 2.0, 1.0), gen_tridiagonal(n, 5.0, 2.0, 1.0)),
        "t10" => (gen_tridiagonal(n, 3.0, 1.0, 1.0), gen_tridiagonal(n, 6.0, 2.0, 2.0)),
        other if GENERATOR_NAMES.contains(&other) => {
            return Err(Error::Config(format!("'{other}' is a Sylvester family, not a Riccati one")))
        }
        other => return Err(Error::NotFound(format!("generator '{other}'"))),
    };
    // N = B Bᵀ = (Bᵀ)ᵀ (Bᵀ)
    let n_mat = b_t.t_matmul(&b_t).symmetrize();
    CareProblem::new(a, n_mat, Matrix::identity(n))
}

/// Lyapunov instances `AᵀX + XA + K = 0` taken from the Riccati families
/// (the `N` term dropped).
pub fn lyapunov_family(name: &str, n: usize) -> Result<LyapunovProblem> {
    let care = care_family(name, n)?;
    LyapunovProblem::new(care.a().clone(), care.k_mat().clone())
}

const AMMONIA_A: [[f64; 9]; 9] = [
    [-4.019, 5.12, 0.0, 0.0, -2.082, 0.0, 0.0, 0.0, 0.87],
    [-0.346, 0.986, 0.0, 0.0, -2.34, 0.0, 0.0, 0.0, 0.97],
    [-7.909, 15.407, -4.096, 0.0, -6.45, 0.0, 0.0, 0.0, 2.68],
    [-21.816, 35.606, -0.339, -3.87, -17.8, 0.0, 0.0, 0.0, 7.39],
    [-60.196, 98.188, -7.907, 0.34, -53.008, 0.0, 0.0, 0.0, 20.4],
    [0.0, 0.0, 0.0, 0.0, 94.0, -147.2, 0.0, 53.2, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 94.0, -147.2, 0.0, 53.2],
    [0.0, 0.0, 0.0, 0.0, 0.0, 12.8, 0.0, -31.6, 0.0],
    [0.0, 0.0, 0.0, 0.0, 12.8, 0.0, 0.0, 18.8, -31.6],
];

// Bᵀ, one row per input.
const AMMONIA_B_T: [[f64; 9]; 3] = [
    [0.010, 0.003, 0.009, 0.024, 0.068, 0.0, 0.0, 0.0, 0.0],
    [-0.011, 0.021, -0.059, -0.162, -0.445, 0.0, 0.0, 0.0, 0.0],
    [-0.151, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
];

/// The 9th-order tubular ammonia reactor model, `N = BBᵀ`, `K = I₉`.
pub fn ammonia_reactor() -> CareProblem {
    let a = Matrix::from_rows(&AMMONIA_A).expect("static data");
    let b = ammonia_b();
    let n_mat = b.matmul_t(&b).symmetrize();
    CareProblem::new(a, n_mat, Matrix::identity(9)).expect("static data is valid")
}

/// The 9×3 input matrix `B` of the ammonia reactor.
pub fn ammonia_b() -> Matrix {
    Matrix::from_rows(&AMMONIA_B_T).expect("static data").transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_examples() {
        let m = gen_tridiagonal(3, 2.0, -4.0, -4.0);
        let expect = Matrix::from_rows(&[[2.0, -4.0, 0.0], [-4.0, 2.0, -4.0], [0.0, -4.0, 2.0]]).unwrap();
        assert_eq!(m, expect);
        assert_eq!(gen_tridiagonal(1, 5.0, 9.0, 9.0), Matrix::scalar(5.0));
        let m = gen_tridiagonal(2, 6.0, 2.0, 1.0);
        assert_eq!(m, Matrix::from_rows(&[[6.0, 1.0], [2.0, 6.0]]).unwrap());
    }

    #[test]
    fn ammonia_fixture() {
        let p = ammonia_reactor();
        assert_eq!(p.a()[(0, 0)], -4.019);
        assert_eq!(p.a()[(4, 8)], 20.4);
        assert_eq!(p.a()[(8, 7)], 18.8);
        assert!(p.n_mat().is_symmetric(0.0));
        assert_eq!(p.k_mat(), &Matrix::identity(9));
        let b = ammonia_b();
        assert_eq!(b.shape(), (9, 3));
        assert_eq!(b.transpose().row(0), &[0.010, 0.003, 0.009, 0.024, 0.068, 0.0, 0.0, 0.0, 0.0]);
        // N₁₁ = 0.010² + 0.011² + 0.151²
        assert!((p.n_mat()[(0, 0)] - (0.0001 + 0.000121 + 0.022801)).abs() < 1e-15);
    }

    #[test]
    fn ammonia_is_deterministic() {
        let (x, y) = (ammonia_reactor(), ammonia_reactor());
        let bits = |m: &Matrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(x.a()), bits(y.a()));
        assert_eq!(bits(x.n_mat()), bits(y.n_mat()));
    }

    #[test]
    fn families_validate() {
        for name in ["t1", "t2", "t3", "t4", "t5", "t6"] {
            let p = sylvester_family(name, 7).unwrap();
            assert_eq!(p.shape(), (7, 7));
            assert!(care_family(name, 7).is_err());
        }
        for name in ["t8", "t9", "t10"] {
            let p = care_family(name, 6).unwrap();
            assert!(p.n_mat().is_symmetric(0.0));
            assert!(sylvester_family(name, 6).is_err());
        }
        assert!(care_family("t7", 9).is_ok());
        assert!(care_family("ammonia", 4).is_err());
    }

    #[test]
    fn t8_input_matrix_is_transposed_band() {
        // Bᵀ has sub 2 and super 1, so B has sub 1 and super 2; N = BBᵀ.
        let p = care_family("t8", 3).unwrap();
        let b = gen_tridiagonal(3, 5.0, 1.0, 2.0);
        let n = b.matmul_t(&b);
        assert!((&n - p.n_mat()).max_abs() < 1e-14);
    }
}
