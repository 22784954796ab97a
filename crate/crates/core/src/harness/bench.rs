//! Runs the rows of a table suite up to an order cap, in a worker pool.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_solver, thread_pool, Equation};
use crate::error::{Error, Result};
use crate::problems::{table_suite, Method, ReferenceResult, SolverSettings, SuiteEntry};
use crate::report::Termination;

pub const CSV_HEADER: [&str; 7] =
    ["algorithm", "n", "iterations", "final_residual", "wall_time_seconds", "paper_iterations", "paper_error"];

pub const DEFAULT_CAP: usize = 256;

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub suite: String,
    /// Rows with `n` above this are skipped.
    pub cap: usize,
    pub threads: Option<usize>,
    /// Recorded in the summary. Every current suite is deterministic.
    pub seed: u64,
    /// Per-method settings (from a config file) over each row's own.
    pub method_overrides: BTreeMap<Method, SolverSettings>,
    /// Applied last, to every row.
    pub overrides: SolverSettings,
}

impl BenchOptions {
    pub fn new(suite: &str) -> Self {
        Self { suite: suite.to_string(), cap: DEFAULT_CAP, threads: None, seed: 0, method_overrides: BTreeMap::new(), overrides: SolverSettings::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub table: String,
    pub algorithm: String,
    pub method: Method,
    pub n: usize,
    pub problem: String,
    pub settings: SolverSettings,
    pub iterations: Option<usize>,
    pub final_residual: Option<f64>,
    pub wall_time_seconds: f64,
    pub termination: Termination,
    pub reference: Option<ReferenceResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSummary {
    pub suite: String,
    pub cap: usize,
    pub seed: u64,
    pub threads: usize,
    pub converged: usize,
    pub not_converged: usize,
    pub errors: usize,
    pub rows: Vec<RunRecord>,
}

impl BenchSummary {
    /// 0 when every row converged, 3 if any row failed with an error,
    /// 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.errors > 0 {
            3
        } else if self.not_converged > 0 {
            2
        } else {
            0
        }
    }
}

fn run_row(entry: &SuiteEntry, opts: &BenchOptions) -> RunRecord {
    let mut settings = entry.settings.clone();
    if let Some(m) = opts.method_overrides.get(&entry.method) {
        settings = settings.merged(m);
    }
    let settings = settings.merged(&opts.overrides);
    let start = std::time::Instant::now();
    let outcome = Equation::for_method(entry.method)
        .build(&entry.source)
        .and_then(|p| run_solver(entry.method, &p, &settings));
    let mut record = RunRecord {
        table: entry.table.clone(),
        algorithm: entry.algorithm_label(),
        method: entry.method,
        n: entry.source.order,
        problem: entry.source.label(),
        settings,
        iterations: None,
        final_residual: None,
        wall_time_seconds: 0.0,
        termination: Termination::Error,
        reference: entry.reference,
        error: None,
    };
    match outcome {
        Ok((report, _)) => {
            record.iterations = Some(report.iterations);
            record.final_residual = Some(report.final_residual);
            record.wall_time_seconds = report.wall_time_seconds;
            record.termination = report.termination;
        }
        Err(e) => {
            log::warn!("{} {} n={}: {e}", entry.table, record.algorithm, record.n);
            if let Some(partial) = e.partial_report() {
                record.iterations = Some(partial.iterations);
                record.final_residual = Some(partial.final_residual);
            }
            record.wall_time_seconds = start.elapsed().as_secs_f64();
            record.error = Some(e.to_string());
        }
    }
    record
}

/// Runs every row of the suite with `n ≤ cap`. Solver failures are recorded
/// per row; the error return is reserved for bad options.
pub fn run_bench(opts: &BenchOptions) -> Result<BenchSummary> {
    let entries = table_suite(&opts.suite)?;
    let smallest = entries.iter().map(|e| e.source.order).min().unwrap_or(0);
    if opts.cap < smallest {
        return Err(Error::Config(format!("cap {} is below the smallest order {smallest} in suite {}", opts.cap, opts.suite)));
    }
    let rows: Vec<&SuiteEntry> = entries.iter().filter(|e| e.source.order <= opts.cap).collect();
    let pool = thread_pool(opts.threads)?;
    // collect() keeps manifest order whatever the completion order
    let records: Vec<RunRecord> = pool.install(|| rows.par_iter().map(|e| run_row(e, opts)).collect());
    let converged = records.iter().filter(|r| r.termination == Termination::Converged).count();
    let errors = records.iter().filter(|r| r.termination == Termination::Error).count();
    Ok(BenchSummary {
        suite: opts.suite.clone(),
        cap: opts.cap,
        seed: opts.seed,
        threads: pool.current_num_threads(),
        converged,
        not_converged: records.len() - converged - errors,
        errors,
        rows: records,
    })
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in records {
        w.write_record([
            r.algorithm.clone(),
            r.n.to_string(),
            opt(r.iterations.map(|i| i.to_string())),
            opt(r.final_residual.map(|v| format!("{v:e}"))),
            format!("{:.6}", r.wall_time_seconds),
            opt(r.reference.map(|p| p.iterations.to_string())),
            opt(r.reference.map(|p| format!("{:e}", p.error))),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t3_at_cap_ten_is_one_ccom_row() {
        let opts = BenchOptions { cap: 10, ..BenchOptions::new("t3") };
        let s = run_bench(&opts).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert_eq!(s.rows[0].algorithm, "CCOM");
        assert_eq!(s.rows[0].termination, Termination::Converged);
        assert_eq!(s.exit_code(), 0);
    }

    #[test]
    fn csv_header_and_blank_cells() {
        let rec = RunRecord {
            table: "t1".into(),
            algorithm: "CCOM".into(),
            method: Method::Ccom,
            n: 10,
            problem: "t1(n=10)".into(),
            settings: SolverSettings::default(),
            iterations: None,
            final_residual: None,
            wall_time_seconds: 0.5,
            termination: Termination::Error,
            reference: None,
            error: Some("boom".into()),
        };
        let mut buf = Vec::new();
        write_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.next().unwrap(), "CCOM,10,,,0.500000,,");
    }

    #[test]
    fn cap_below_every_row_is_rejected() {
        let opts = BenchOptions { cap: 4, ..BenchOptions::new("t5") };
        assert!(matches!(run_bench(&opts), Err(Error::Config(_))));
        assert!(matches!(run_bench(&BenchOptions::new("t99")), Err(Error::NotFound(_))));
    }

    #[test]
    fn overrides_are_recorded() {
        let opts = BenchOptions {
            cap: 10,
            overrides: SolverSettings { max_iterations: Some(7), ..Default::default() },
            ..BenchOptions::new("t3")
        };
        let s = run_bench(&opts).unwrap();
        assert_eq!(s.rows[0].settings.max_iterations, Some(7));
    }
}
