use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    Stagnated,
    Diverged,
    Error,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
            Termination::Stagnated => "stagnated",
            Termination::Diverged => "diverged",
            Termination::Error => "error",
        };
        f.write_str(s)
    }
}

/// Outcome of one solver run.
///
/// `residual_history[0]` is the residual of the starting point and the last
/// entry equals `final_residual`. Solvers that record one entry per iteration
/// keep `residual_history.len() == iterations + 1`; strided or outer-loop
/// solvers note their sampling in `detail`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub solution: Matrix,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    pub wall_time_seconds: f64,
    pub termination: Termination,
    #[serde(default)]
    pub detail: BTreeMap<String, Value>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn set_detail(&mut self, key: &str, value: impl Into<Value>) {
        self.detail.insert(key.to_string(), value.into());
    }
}

/// Accumulates iterates and residuals while a solver runs.
pub(crate) struct ReportBuilder {
    start: Instant,
    history: Vec<f64>,
    iterations: usize,
    detail: BTreeMap<String, Value>,
}

impl ReportBuilder {
    pub fn new(initial_residual: f64) -> Self {
        Self {
            start: Instant::now(),
            history: vec![initial_residual],
            iterations: 0,
            detail: BTreeMap::new(),
        }
    }

    /// Records one completed iteration.
    pub fn step(&mut self, residual: f64) {
        self.iterations += 1;
        self.history.push(residual);
    }

    /// Counts iterations without sampling the residual.
    pub fn skip(&mut self, n: usize) {
        self.iterations += n;
    }

    /// Overwrites the most recent sample.
    pub fn replace_last(&mut self, residual: f64) {
        *self.history.last_mut().expect("history starts non-empty") = residual;
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn last(&self) -> f64 {
        *self.history.last().expect("history starts non-empty")
    }

    pub fn detail(&mut self, key: &str, value: impl Into<Value>) {
        self.detail.insert(key.to_string(), value.into());
    }

    pub fn finish(self, solution: Matrix, termination: Termination) -> SolveReport {
        SolveReport {
            solution,
            iterations: self.iterations,
            final_residual: *self.history.last().expect("history starts non-empty"),
            residual_history: self.history,
            wall_time_seconds: self.start.elapsed().as_secs_f64(),
            termination,
            detail: self.detail,
        }
    }
}
