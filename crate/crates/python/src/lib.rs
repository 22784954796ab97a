//! Python bindings. Matrices cross the boundary as lists of rows; numpy
//! arrays are accepted wherever a matrix is expected.

use std::str::FromStr;

use matrixopt::harness::bench::{run_bench, BenchOptions};
use matrixopt::harness::config::apply_setting;
use matrixopt::harness::run_solver;
use matrixopt::problems::{self, Method, Problem, SolverSettings, GENERATOR_NAMES, TABLE_IDS};
use matrixopt::{CareProblem, Error, LyapunovProblem, Matrix, SolveReport, SylvesterProblem};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict};

create_exception!(matrixopt, SolverError, PyRuntimeError, "A solver failed part-way or broke down.");

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::NotFound(_) | Error::Dimension(_) | Error::NonFinite | Error::Capacity { .. } => {
            PyValueError::new_err(e.to_string())
        }
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => SolverError::new_err(other.to_string()),
    }
}

type Rows = Vec<Vec<f64>>;

fn to_matrix(rows: Rows) -> PyResult<Matrix> {
    if rows.is_empty() {
        return Err(PyValueError::new_err("a matrix needs at least one row"));
    }
    Matrix::from_rows(&rows).map_err(to_py_err)
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn settings_from(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<SolverSettings> {
    let mut s = SolverSettings::default();
    if let Some(kw) = kwargs {
        for (k, v) in kw.iter() {
            let key: String = k.extract()?;
            let value = if v.is_instance_of::<PyBool>() { v.str()?.to_string().to_ascii_lowercase() } else { v.str()?.to_string() };
            apply_setting(&mut s, &key, &value).map_err(to_py_err)?;
        }
    }
    Ok(s)
}

fn solve_problem(py: Python<'_>, problem: Problem, method: &str, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<PySolveReport> {
    let method = Method::from_str(method).map_err(to_py_err)?;
    let settings = settings_from(kwargs)?;
    let (report, config) = py.detach(|| run_solver(method, &problem, &settings)).map_err(to_py_err)?;
    Ok(PySolveReport { method: method.name().to_string(), report, config })
}

/// Outcome of one solve.
#[pyclass(name = "SolveReport", module = "matrixopt", frozen)]
struct PySolveReport {
    method: String,
    report: SolveReport,
    config: serde_json::Value,
}

#[pymethods]
impl PySolveReport {
    #[getter]
    fn method(&self) -> &str {
        &self.method
    }

    #[getter]
    fn solution(&self) -> Rows {
        self.report.solution.to_rows()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.report.iterations
    }

    #[getter]
    fn final_residual(&self) -> f64 {
        self.report.final_residual
    }

    #[getter]
    fn residual_history(&self) -> Vec<f64> {
        self.report.residual_history.clone()
    }

    /// `converged`, `max_iterations`, `stagnated`, `diverged` or `error`.
    #[getter]
    fn termination(&self) -> String {
        serde_json::to_value(self.report.termination)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.report.converged()
    }

    #[getter]
    fn wall_time_seconds(&self) -> f64 {
        self.report.wall_time_seconds
    }

    #[getter]
    fn config<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &self.config)
    }

    #[getter]
    fn detail<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &serde_json::to_value(&self.report.detail).unwrap_or_default())
    }

    /// Everything above as a plain dict.
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let value = serde_json::json!({
            "method": self.method,
            "config": self.config,
            "iterations": self.report.iterations,
            "final_residual": self.report.final_residual,
            "residual_history": self.report.residual_history,
            "termination": self.termination(),
            "wall_time_seconds": self.report.wall_time_seconds,
            "detail": self.report.detail,
            "solution": self.report.solution.to_rows(),
        });
        json_to_py(py, &value)
    }

    fn __repr__(&self) -> String {
        format!(
            "SolveReport(method='{}', termination='{}', iterations={}, final_residual={:e})",
            self.method,
            self.termination(),
            self.report.iterations,
            self.report.final_residual
        )
    }
}

/// `AX + XB = C`.
#[pyclass(name = "SylvesterProblem", module = "matrixopt", frozen)]
struct PySylvester {
    inner: SylvesterProblem,
}

#[pymethods]
impl PySylvester {
    #[new]
    fn new(a: Rows, b: Rows, c: Rows) -> PyResult<Self> {
        let inner = SylvesterProblem::new(to_matrix(a)?, to_matrix(b)?, to_matrix(c)?).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    /// A registered test family (`t1` to `t6`) at order `n`.
    #[staticmethod]
    fn generate(name: &str, n: usize) -> PyResult<Self> {
        Ok(Self { inner: problems::sylvester_family(name, n).map_err(to_py_err)? })
    }

    #[getter]
    fn a(&self) -> Rows {
        self.inner.a().to_rows()
    }

    #[getter]
    fn b(&self) -> Rows {
        self.inner.b().to_rows()
    }

    #[getter]
    fn c(&self) -> Rows {
        self.inner.c().to_rows()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    /// `‖AX + XB − C‖_F`
    fn residual(&self, x: Rows) -> PyResult<f64> {
        matrixopt::sylvester_oracle::sylvester_residual(&self.inner, &to_matrix(x)?).map_err(to_py_err)
    }

    /// Solve with `method` (`direct`, `ccom`, `dfp`, `bfgs`, `cg`, `ar`).
    /// Keyword arguments use the config-file keys, e.g. `tol=1e-10`.
    #[pyo3(signature = (method = "direct", **settings))]
    fn solve(&self, py: Python<'_>, method: &str, settings: Option<&Bound<'_, PyDict>>) -> PyResult<PySolveReport> {
        solve_problem(py, Problem::Sylvester(self.inner.clone()), method, settings)
    }

    fn __repr__(&self) -> String {
        let (m, n) = self.inner.shape();
        format!("SylvesterProblem({m}x{n})")
    }
}

/// `AᵀX + XA + Q = 0`.
#[pyclass(name = "LyapunovProblem", module = "matrixopt", frozen)]
struct PyLyapunov {
    inner: LyapunovProblem,
}

#[pymethods]
impl PyLyapunov {
    #[new]
    fn new(a: Rows, q: Rows) -> PyResult<Self> {
        Ok(Self { inner: LyapunovProblem::new(to_matrix(a)?, to_matrix(q)?).map_err(to_py_err)? })
    }

    #[staticmethod]
    fn generate(name: &str, n: usize) -> PyResult<Self> {
        Ok(Self { inner: problems::lyapunov_family(name, n).map_err(to_py_err)? })
    }

    #[getter]
    fn a(&self) -> Rows {
        self.inner.a().to_rows()
    }

    #[getter]
    fn q(&self) -> Rows {
        self.inner.q().to_rows()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    fn residual(&self, x: Rows) -> PyResult<f64> {
        let x = to_matrix(x)?;
        if x.shape() != (self.inner.order(), self.inner.order()) {
            return Err(PyValueError::new_err("X must match the order of A"));
        }
        Ok(self.inner.residual(&x))
    }

    /// Solve with `method`: `direct`, `admm` (three-block ADMM), or any
    /// Sylvester method applied to `AᵀX + XA = −Q`.
    #[pyo3(signature = (method = "direct", **settings))]
    fn solve(&self, py: Python<'_>, method: &str, settings: Option<&Bound<'_, PyDict>>) -> PyResult<PySolveReport> {
        solve_problem(py, Problem::Lyapunov(self.inner.clone()), method, settings)
    }

    fn __repr__(&self) -> String {
        format!("LyapunovProblem(n={})", self.inner.order())
    }
}

/// `AᵀX + XA − XNX + K = 0`.
#[pyclass(name = "CareProblem", module = "matrixopt", frozen)]
struct PyCare {
    inner: CareProblem,
}

#[pymethods]
impl PyCare {
    #[new]
    fn new(a: Rows, n: Rows, k: Rows) -> PyResult<Self> {
        Ok(Self { inner: CareProblem::new(to_matrix(a)?, to_matrix(n)?, to_matrix(k)?).map_err(to_py_err)? })
    }

    /// A registered family (`t7`/`ammonia`, `t8` to `t10`) at order `n`.
    #[staticmethod]
    fn generate(name: &str, n: usize) -> PyResult<Self> {
        Ok(Self { inner: problems::care_family(name, n).map_err(to_py_err)? })
    }

    #[getter]
    fn a(&self) -> Rows {
        self.inner.a().to_rows()
    }

    #[getter]
    fn n(&self) -> Rows {
        self.inner.n_mat().to_rows()
    }

    #[getter]
    fn k(&self) -> Rows {
        self.inner.k_mat().to_rows()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    fn residual(&self, x: Rows) -> PyResult<f64> {
        matrixopt::baselines::care_residual(&self.inner, &to_matrix(x)?).map_err(to_py_err)
    }

    /// Solve with `method` (`admm`, `newton`, `newton-admm`).
    #[pyo3(signature = (method = "newton-admm", **settings))]
    fn solve(&self, py: Python<'_>, method: &str, settings: Option<&Bound<'_, PyDict>>) -> PyResult<PySolveReport> {
        solve_problem(py, Problem::Care(self.inner.clone()), method, settings)
    }

    fn __repr__(&self) -> String {
        format!("CareProblem(n={})", self.inner.order())
    }
}

/// Runs a table suite up to order `cap`; one dict per row.
#[pyfunction(name = "bench")]
#[pyo3(signature = (suite, cap = 256, threads = None))]
fn bench_suite<'py>(py: Python<'py>, suite: &str, cap: usize, threads: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let opts = BenchOptions { cap, threads, ..BenchOptions::new(suite) };
    let summary = py.detach(|| run_bench(&opts)).map_err(to_py_err)?;
    json_to_py(py, &serde_json::to_value(&summary.rows).unwrap_or_default())
}

#[pyfunction]
fn read_matrix_market(path: std::path::PathBuf) -> PyResult<Rows> {
    Ok(problems::read_matrix_market(path).map_err(to_py_err)?.to_rows())
}

#[pyfunction]
fn write_matrix_market(path: std::path::PathBuf, m: Rows) -> PyResult<()> {
    problems::write_matrix_market(path, &to_matrix(m)?).map_err(to_py_err)
}

#[pyfunction]
fn methods() -> Vec<&'static str> {
    Method::ALL.iter().map(|m| m.name()).collect()
}

#[pyfunction]
fn generators() -> Vec<&'static str> {
    GENERATOR_NAMES.to_vec()
}

#[pyfunction]
fn tables() -> Vec<&'static str> {
    TABLE_IDS.to_vec()
}

#[pymodule]
#[pyo3(name = "matrixopt")]
fn matrixopt_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySylvester>()?;
    m.add_class::<PyLyapunov>()?;
    m.add_class::<PyCare>()?;
    m.add_class::<PySolveReport>()?;
    m.add_function(wrap_pyfunction!(bench_suite, m)?)?;
    m.add_function(wrap_pyfunction!(read_matrix_market, m)?)?;
    m.add_function(wrap_pyfunction!(write_matrix_market, m)?)?;
    m.add_function(wrap_pyfunction!(methods, m)?)?;
    m.add_function(wrap_pyfunction!(generators, m)?)?;
    m.add_function(wrap_pyfunction!(tables, m)?)?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
