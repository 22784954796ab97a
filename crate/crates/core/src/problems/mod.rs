//! Validated equation instances, the example families used by the benchmark
//! suites, and MatrixMarket I/O.

mod generators;
mod matrix_market;
mod suite;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, Matrix};

pub use generators::{
    ammonia_reactor, care_family, gen_tridiagonal, lyapunov_family, sylvester_family,
    GENERATOR_NAMES,
};
pub use matrix_market::{read_matrix_market, write_matrix_market, MM_MAX_ENTRIES};
pub use suite::{table_suite, Method, ReferenceResult, SolverSettings, SuiteEntry, TABLE_IDS};

/// Absolute tolerance for the symmetry checks on `N`, `K` and `Q`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// `AX + XB = C` with `A` m×m, `B` n×n and `C` m×n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SylvesterProblem {
    a: Matrix,
    b: Matrix,
    c: Matrix,
}

impl SylvesterProblem {
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Result<Self> {
        if !a.is_square() || !b.is_square() {
            return Err(Error::dim("Sylvester coefficients A and B must be square"));
        }
        if c.shape() != (a.rows(), b.rows()) {
            return Err(Error::dim(format!(
                "C is {}x{}, expected {}x{}",
                c.rows(),
                c.cols(),
                a.rows(),
                b.rows()
            )));
        }
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    /// `(m, n)`: the shape of the unknown.
    pub fn shape(&self) -> (usize, usize) {
        self.c.shape()
    }

    /// `AX + XB`
    pub fn apply(&self, x: &Matrix) -> Matrix {
        &(&self.a * x) + &(x * &self.b)
    }

    /// `AX + XB − C`
    pub fn residual_matrix(&self, x: &Matrix) -> Matrix {
        let mut r = self.apply(x);
        r -= &self.c;
        r
    }

    pub(crate) fn check_unknown(&self, x: &Matrix) -> Result<()> {
        if x.shape() != self.shape() {
            return Err(Error::dim(format!(
                "unknown is {}x{}, expected {}x{}",
                x.rows(),
                x.cols(),
                self.shape().0,
                self.shape().1
            )));
        }
        Ok(())
    }
}

/// `AᵀX + XA − XNX + K = 0` with symmetric `N` and `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CareProblem {
    a: Matrix,
    n_mat: Matrix,
    k_mat: Matrix,
}

impl CareProblem {
    pub fn new(a: Matrix, n_mat: Matrix, k_mat: Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dim("CARE coefficient A must be square"));
        }
        let n = a.rows();
        if n_mat.shape() != (n, n) || k_mat.shape() != (n, n) {
            return Err(Error::dim(format!("N and K must be {n}x{n}")));
        }
        if !(a.is_finite() && n_mat.is_finite() && k_mat.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !n_mat.is_symmetric(SYMMETRY_TOL) {
            return Err(Error::Precondition("N is not symmetric".into()));
        }
        if !k_mat.is_symmetric(SYMMETRY_TOL) {
            return Err(Error::Precondition("K is not symmetric".into()));
        }
        Ok(Self { a, n_mat, k_mat })
    }

    /// Like [`CareProblem::new`], additionally requiring `N` and `K` to be
    /// positive semi-definite (smallest eigenvalue ≥ `−psd_tol · ‖·‖_F`).
    pub fn new_checked(a: Matrix, n_mat: Matrix, k_mat: Matrix, psd_tol: f64) -> Result<Self> {
        let p = Self::new(a, n_mat, k_mat)?;
        for (name, m) in [("N", &p.n_mat), ("K", &p.k_mat)] {
            let min = symmetric_eigenvalues(m)?[0];
            if min < -psd_tol * m.frobenius_norm().max(1.0) {
                return Err(Error::Precondition(format!(
                    "{name} is not positive semi-definite (eigenvalue {min:e})"
                )));
            }
        }
        Ok(p)
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn n_mat(&self) -> &Matrix {
        &self.n_mat
    }

    pub fn k_mat(&self) -> &Matrix {
        &self.k_mat
    }

    pub fn order(&self) -> usize {
        self.a.rows()
    }

    /// `AᵀX + XA − XNX + K`
    pub fn residual_matrix(&self, x: &Matrix) -> Matrix {
        let mut r = self.a.t_matmul(x);
        r += &(x * &self.a);
        r -= &(&(x * &self.n_mat) * x);
        r += &self.k_mat;
        r
    }

    pub(crate) fn check_unknown(&self, x: &Matrix) -> Result<()> {
        let n = self.order();
        if x.shape() != (n, n) {
            return Err(Error::dim(format!(
                "unknown is {}x{}, expected {n}x{n}",
                x.rows(),
                x.cols()
            )));
        }
        Ok(())
    }
}

/// `AᵀX + XA + Q = 0` with symmetric `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovProblem {
    a: Matrix,
    q: Matrix,
}

impl LyapunovProblem {
    pub fn new(a: Matrix, q: Matrix) -> Result<Self> {
        if !a.is_square() || q.shape() != a.shape() {
            return Err(Error::dim("Lyapunov coefficients must be square and of equal order"));
        }
        if !(a.is_finite() && q.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !q.is_symmetric(SYMMETRY_TOL) {
            return Err(Error::Precondition("Q is not symmetric".into()));
        }
        Ok(Self { a, q })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn order(&self) -> usize {
        self.a.rows()
    }

    /// `AᵀX + XA + Q`
    pub fn residual_matrix(&self, x: &Matrix) -> Matrix {
        let mut r = self.a.t_matmul(x);
        r += &(x * &self.a);
        r += &self.q;
        r
    }

    pub fn residual(&self, x: &Matrix) -> f64 {
        self.residual_matrix(x).frobenius_norm()
    }
}

/// Any of the three equation kinds.
#[derive(Debug, Clone)]
pub enum Problem {
    Sylvester(SylvesterProblem),
    Lyapunov(LyapunovProblem),
    Care(CareProblem),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum SourceKind {
    /// A registered generator family, see [`GENERATOR_NAMES`].
    Generator { name: String, params: BTreeMap<String, f64> },
    /// MatrixMarket files, in coefficient order (A, B, C / A, Q / A, N, K).
    Files { paths: Vec<PathBuf> },
}

/// Where a benchmark problem comes from; enough to rebuild it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSource {
    pub kind: SourceKind,
    pub order: usize,
}

impl ProblemSource {
    pub fn generator(name: &str, order: usize) -> Result<Self> {
        if !GENERATOR_NAMES.contains(&name) {
            return Err(Error::NotFound(format!("generator '{name}'")));
        }
        Ok(Self {
            kind: SourceKind::Generator { name: name.to_string(), params: BTreeMap::new() },
            order,
        })
    }

    pub fn files(paths: Vec<PathBuf>, order: usize) -> Self {
        Self { kind: SourceKind::Files { paths }, order }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            SourceKind::Generator { name, .. } => format!("{name}(n={})", self.order),
            SourceKind::Files { paths } => paths
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>()
                .join(","),
        }
    }

    pub fn sylvester(&self) -> Result<SylvesterProblem> {
        match &self.kind {
            SourceKind::Generator { name, .. } => sylvester_family(name, self.order),
            SourceKind::Files { paths } => {
                let [a, b, c] = read_n::<3>(paths, "Sylvester needs A, B and C")?;
                SylvesterProblem::new(a, b, c)
            }
        }
    }

    pub fn care(&self) -> Result<CareProblem> {
        match &self.kind {
            SourceKind::Generator { name, .. } => care_family(name, self.order),
            SourceKind::Files { paths } => {
                let [a, n, k] = read_n::<3>(paths, "CARE needs A, N and K")?;
                CareProblem::new(a, n, k)
            }
        }
    }

    pub fn lyapunov(&self) -> Result<LyapunovProblem> {
        match &self.kind {
            SourceKind::Generator { name, .. } => lyapunov_family(name, self.order),
            SourceKind::Files { paths } => {
                let [a, q] = read_n::<2>(paths, "Lyapunov needs A and Q")?;
                LyapunovProblem::new(a, q)
            }
        }
    }
}

fn read_n<const K: usize>(paths: &[PathBuf], what: &str) -> Result<[Matrix; K]> {
    if paths.len() != K {
        return Err(Error::Config(format!("{what}: got {} files", paths.len())));
    }
    let mats = paths.iter().map(read_matrix_market).collect::<Result<Vec<_>>>()?;
    Ok(mats.try_into().expect("length checked above"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sylvester_shape_validation() {
        let p = SylvesterProblem::new(Matrix::identity(2), Matrix::identity(3), Matrix::zeros(2, 3));
        assert!(p.is_ok());
        let bad = SylvesterProblem::new(Matrix::identity(2), Matrix::identity(3), Matrix::zeros(3, 2));
        assert!(matches!(bad, Err(Error::Dimension(_))));
    }

    #[test]
    fn care_requires_symmetry() {
        let n = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        let bad = CareProblem::new(Matrix::identity(2), n, Matrix::identity(2));
        assert!(matches!(bad, Err(Error::Precondition(_))));
    }

    #[test]
    fn care_psd_flag() {
        let indefinite = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(CareProblem::new(Matrix::identity(2), indefinite.clone(), Matrix::identity(2)).is_ok());
        let checked = CareProblem::new_checked(Matrix::identity(2), indefinite, Matrix::identity(2), 1e-12);
        assert!(matches!(checked, Err(Error::Precondition(_))));
    }

    #[test]
    fn unknown_generator_is_not_found() {
        assert!(matches!(ProblemSource::generator("t99", 4), Err(Error::NotFound(_))));
    }
}
