//! Iteratively reweighted ℓ2,1 minimization over the affine set `Mx = c`,
//! applied to the vectorized Sylvester equation.
//!
//! Each step solves the weighted least-norm problem
//! `x = D⁻¹Mᵀ(MD⁻¹Mᵀ)⁻¹c` and then reweights `dᵢᵢ = 1/(2‖xⁱ‖₂)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spd_solve, unvec, vec, Matrix, DEFAULT_KRON_CAP};
use crate::problems::SylvesterProblem;
use crate::report::{ReportBuilder, SolveReport, Termination};
use crate::sylvester_oracle::{kronecker_operator, sylvester_residual};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CcomConfig {
    /// Stop once `‖AX + XB − C‖_F ≤ epsilon`.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Row norms are floored here before reweighting.
    pub row_norm_floor: f64,
    /// Consecutive entries of `x` that share one weight. `1` gives the plain
    /// ℓ1 reading; `m` groups each column of `X`.
    pub group_rows: usize,
    pub kron_cap: usize,
}

impl Default for CcomConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-8,
            max_iterations: 100,
            row_norm_floor: 1e-12,
            group_rows: 1,
            kron_cap: DEFAULT_KRON_CAP,
        }
    }
}

impl CcomConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if !(self.row_norm_floor > 0.0) {
            return Err(Error::Config("row_norm_floor must be positive".into()));
        }
        if self.group_rows == 0 {
            return Err(Error::Config("group_rows must be positive".into()));
        }
        Ok(())
    }
}

/// Sum over rows of each row's Euclidean norm.
pub fn l21_norm(m: &Matrix) -> f64 {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
        .sum()
}

/// ℓ2,1 norm of a column vector whose entries are taken `group` at a time.
pub fn grouped_l21(x: &[f64], group: usize) -> f64 {
    x.chunks(group).map(|g| g.iter().map(|v| v * v).sum::<f64>().sqrt()).sum()
}

/// `D` with `dᵢᵢ = 1/(2·max(‖row i of x‖₂, floor))`.
pub fn reweight_diagonal(x: &Matrix, floor: f64) -> Matrix {
    let d: Vec<f64> = (0..x.rows())
        .map(|i| {
            let norm = x.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            1.0 / (2.0 * norm.max(floor))
        })
        .collect();
    Matrix::from_diag(&d)
}

fn group_inverse_weights(x: &[f64], group: usize, floor: f64) -> Vec<f64> {
    // entries of D⁻¹, i.e. 2·max(‖group‖, floor), one per entry of x
    let mut out = Vec::with_capacity(x.len());
    for g in x.chunks(group) {
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        out.extend(std::iter::repeat(2.0 * norm.max(floor)).take(g.len()));
    }
    out
}

fn step_with_inverse_weights(m_sys: &Matrix, c_vec: &Matrix, d_inv: &[f64]) -> Result<Matrix> {
    let (s, t) = m_sys.shape();
    if c_vec.shape() != (s, 1) {
        return Err(Error::dim(format!("c is {}x{}, expected {s}x1", c_vec.rows(), c_vec.cols())));
    }
    if d_inv.len() != t {
        return Err(Error::dim(format!("weight matrix has order {}, expected {t}", d_inv.len())));
    }
    // M·D⁻¹ scales columns
    let mut scaled = m_sys.clone();
    for row in scaled.as_mut_slice().chunks_mut(t) {
        for (v, w) in row.iter_mut().zip(d_inv) {
            *v *= w;
        }
    }
    let gram = scaled.matmul_t(m_sys).symmetrize();
    let u = spd_solve(&gram, c_vec).map_err(|e| match e {
        Error::Singular(msg) => Error::Singular(format!("M·D⁻¹·Mᵀ: {msg} (M is rank deficient)")),
        other => other,
    })?;
    // x = D⁻¹Mᵀu
    let mut x = m_sys.t_matmul(&u);
    for (v, w) in x.as_mut_slice().iter_mut().zip(d_inv) {
        *v *= w;
    }
    Ok(x)
}

/// One weighted least-norm step `x = D⁻¹Mᵀ(MD⁻¹Mᵀ)⁻¹c` for a positive diagonal `d`.
pub fn ccom_step(m_sys: &Matrix, c_vec: &Matrix, d: &Matrix) -> Result<Matrix> {
    if !d.is_square() {
        return Err(Error::dim("weight matrix must be square"));
    }
    let d_inv: Vec<f64> = d
        .diag()
        .into_iter()
        .map(|v| if v > 0.0 { Ok(1.0 / v) } else { Err(Error::Precondition("weights must be positive".into())) })
        .collect::<Result<_>>()?;
    step_with_inverse_weights(m_sys, c_vec, &d_inv)
}

/// Outcome of [`ccom_minimize`] on a general affine system.
#[derive(Debug, Clone)]
pub struct CcomTrace {
    pub x: Matrix,
    pub iterations: usize,
    /// ℓ2,1 objective of each iterate, starting with the first step.
    pub objective: Vec<f64>,
    pub converged: bool,
}

/// Minimizes the grouped ℓ2,1 norm of `x` subject to `Mx = c`, stopping once
/// successive iterates differ by at most `epsilon·(1 + ‖x‖₂)`.
pub fn ccom_minimize(m_sys: &Matrix, c_vec: &Matrix, cfg: &CcomConfig) -> Result<CcomTrace> {
    cfg.validate()?;
    let t = m_sys.cols();
    let mut d_inv = vec![1.0; t];
    let mut prev: Option<Matrix> = None;
    let mut objective = Vec::new();
    for k in 1..=cfg.max_iterations {
        let x = step_with_inverse_weights(m_sys, c_vec, &d_inv)?;
        objective.push(grouped_l21(x.as_slice(), cfg.group_rows));
        let done = prev
            .as_ref()
            .is_some_and(|p| (&x - p).frobenius_norm() <= cfg.epsilon * (1.0 + x.frobenius_norm()));
        d_inv = group_inverse_weights(x.as_slice(), cfg.group_rows, cfg.row_norm_floor);
        if done {
            return Ok(CcomTrace { x, iterations: k, objective, converged: true });
        }
        prev = Some(x);
    }
    let x = prev.unwrap_or_else(|| Matrix::zeros(t, 1));
    Ok(CcomTrace { x, iterations: cfg.max_iterations, objective, converged: false })
}

/// Solves `AX + XB = C` through `M = Iₙ⊗A + Bᵀ⊗Iₘ`, `c = vec(C)`, starting from `D₀ = I`.
///
/// `detail["l21_objective"]` holds the ℓ2,1 objective of every iterate.
pub fn solve_ccom(p: &SylvesterProblem, cfg: &CcomConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let (m, n) = p.shape();
    let m_sys = kronecker_operator(p, cfg.kron_cap)?;
    let c_vec = vec(p.c());
    let mut report = ReportBuilder::new(p.c().frobenius_norm());
    let mut d_inv = vec![1.0; m * n];
    let mut x = Matrix::zeros(m, n);
    let mut objective = Vec::new();
    let mut termination = Termination::MaxIterations;
    if report.last() <= cfg.epsilon {
        termination = Termination::Converged;
    } else {
        for _ in 0..cfg.max_iterations {
            let xv = step_with_inverse_weights(&m_sys, &c_vec, &d_inv)?;
            objective.push(grouped_l21(xv.as_slice(), cfg.group_rows));
            x = unvec(&xv, m, n)?;
            let res = sylvester_residual(p, &x)?;
            report.step(res);
            log::debug!("ccom iteration {}: residual {res:e}", report.iterations());
            if res <= cfg.epsilon {
                termination = Termination::Converged;
                break;
            }
            d_inv = group_inverse_weights(xv.as_slice(), cfg.group_rows, cfg.row_norm_floor);
        }
    }
    report.detail("l21_objective", objective);
    report.detail("group_rows", cfg.group_rows);
    Ok(report.finish(x, termination))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::sylvester_family;
    use crate::sylvester_oracle::solve_kronecker_direct;

    #[test]
    fn l21_examples() {
        assert_eq!(l21_norm(&Matrix::identity(2)), 2.0);
        assert_eq!(l21_norm(&Matrix::from_rows(&[[3.0, 4.0], [0.0, 0.0]]).unwrap()), 5.0);
        assert_eq!(l21_norm(&Matrix::column(&[1.0, -2.0, 2.0])), 5.0);
        assert_eq!(grouped_l21(&[3.0, 4.0, 0.0, 1.0], 2), 6.0);
    }

    #[test]
    fn reweight_examples() {
        assert_eq!(reweight_diagonal(&Matrix::identity(2), 1e-12), Matrix::from_diag(&[0.5, 0.5]));
        let d = reweight_diagonal(&Matrix::from_rows(&[[2.0, 0.0], [0.0, 0.0]]).unwrap(), 1e-12);
        assert_eq!(d[(0, 0)], 0.25);
        assert_eq!(d[(1, 1)], 1.0 / (2.0 * 1e-12));
    }

    #[test]
    fn step_examples() {
        let x = ccom_step(&Matrix::identity(2), &Matrix::column(&[3.0, 4.0]), &Matrix::from_diag(&[0.3, 7.0])).unwrap();
        assert!((&x - &Matrix::column(&[3.0, 4.0])).max_abs() < 1e-14);

        let m = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let x = ccom_step(&m, &Matrix::scalar(2.0), &Matrix::identity(2)).unwrap();
        assert!((&x - &Matrix::column(&[0.4, 0.8])).max_abs() < 1e-15);

        let dup = Matrix::from_rows(&[[1.0, 2.0, 0.0], [1.0, 2.0, 0.0]]).unwrap();
        let err = ccom_step(&dup, &Matrix::column(&[1.0, 1.0]), &Matrix::identity(3));
        assert!(matches!(err, Err(Error::Singular(_))));
    }

    #[test]
    fn l1_subproblem_reaches_sparse_vertex() {
        // min |x₁| + |x₂| s.t. x₁ + 2x₂ = 2 has the unique minimizer (0, 1)
        let m = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let trace = ccom_minimize(&m, &Matrix::scalar(2.0), &CcomConfig::default()).unwrap();
        assert!(trace.converged);
        assert!(trace.x[(0, 0)].abs() < 1e-4 && (trace.x[(1, 0)] - 1.0).abs() < 1e-4);
        for w in trace.objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-10);
        }
    }

    #[test]
    fn diagonal_family_converges_in_one_step() {
        let p = sylvester_family("t3", 10).unwrap();
        let r = solve_ccom(&p, &CcomConfig::default()).unwrap();
        assert!(r.converged());
        assert_eq!(r.iterations, 1);
        assert!(r.final_residual <= 1e-8);
        assert_eq!(r.residual_history.len(), r.iterations + 1);
    }

    #[test]
    fn tridiagonal_family_and_oracle() {
        let p = sylvester_family("t1", 10).unwrap();
        let r = solve_ccom(&p, &CcomConfig::default()).unwrap();
        assert!(r.converged() && r.iterations <= 3);
        let direct = solve_kronecker_direct(&p).unwrap();
        assert!((&r.solution - &direct).frobenius_norm() <= 1e-8 * (1.0 + direct.frobenius_norm()));
    }

    #[test]
    fn column_grouping_also_solves() {
        let p = sylvester_family("t5", 6).unwrap();
        let cfg = CcomConfig { group_rows: 6, ..Default::default() };
        let r = solve_ccom(&p, &cfg).unwrap();
        assert!(r.converged());
    }

    #[test]
    fn rejects_bad_config() {
        let p = sylvester_family("t3", 2).unwrap();
        let cfg = CcomConfig { epsilon: 0.0, ..Default::default() };
        assert!(matches!(solve_ccom(&p, &cfg), Err(Error::Config(_))));
    }
}
