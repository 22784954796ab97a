//! Command-line interface: `solve`, `bench`, `sweep` and `plot`.
//!
//! Exit codes: 0 converged, 1 usage error, 2 not converged (iteration cap,
//! stagnation or divergence), 3 solver error.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::bench::{run_bench, write_csv, BenchOptions, DEFAULT_CAP};
use super::config::load_settings;
use super::plot::write_svg;
use super::sweep::{run_sweep, write_sweep_csv, ParamRange, Sampling, SweepOptions};
use super::{exit_code, run_solver, Equation, JsonReport, ProblemInfo};
use crate::error::Error;
use crate::problems::{table_suite, write_matrix_market, Method, Problem, ProblemSource, SolverSettings};
use crate::quasi_newton::{LineSearch, QnMode};
use crate::report::Termination;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "matrixopt", version, about = "Optimization-based solvers for Sylvester, Lyapunov and Riccati equations")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one equation and print a JSON report.
    Solve(SolveArgs),
    /// Run a table suite and emit CSV.
    Bench(BenchArgs),
    /// Sweep ADMM penalty parameters.
    Sweep(SweepArgs),
    /// Draw the residual history of a JSON report as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct PenaltyArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Stopping tolerance (gradient norm for dfp/bfgs, residual otherwise).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// exact, armijo or wolfe.
    #[arg(long)]
    pub linesearch: Option<LineSearch>,
    /// matrix-form or vectorized.
    #[arg(long)]
    pub mode: Option<QnMode>,
    /// Fixed inner tolerance for newton-admm.
    #[arg(long)]
    pub inner_tol: Option<f64>,
    /// Forcing factor for newton-admm inner solves.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub inner_max: Option<usize>,
    #[arg(long, value_name = "BOOL")]
    pub warm_start: Option<bool>,
    /// Richardson damping for ar.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub group_rows: Option<usize>,
    /// Evaluate the ADMM residual every k iterations.
    #[arg(long)]
    pub check_every: Option<usize>,
}

impl SolverArgs {
    fn settings(&self, p: &PenaltyArgs) -> SolverSettings {
        SolverSettings {
            tol: self.tol,
            max_iterations: self.max_iterations,
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            linesearch: self.linesearch,
            mode: self.mode,
            inner_tol: self.inner_tol,
            eta: self.eta,
            inner_max: self.inner_max,
            warm_start: self.warm_start,
            omega: self.omega,
            group_rows: self.group_rows,
            check_every: self.check_every,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    /// Generator family (t1 ... t10, ammonia).
    #[arg(long = "gen", value_name = "NAME", conflicts_with_all = ["suite", "from_mm"])]
    pub generator: Option<String>,
    /// Table suite: its generator plus the table's settings for this method and order.
    #[arg(long, value_name = "TABLE", conflicts_with = "from_mm")]
    pub suite: Option<String>,
    /// Problem order.
    #[arg(long)]
    pub n: Option<usize>,
    /// MatrixMarket coefficient files: A B C (sylvester), A Q (lyapunov), A N K (care).
    #[arg(long = "from-mm", value_name = "FILE", num_args = 1..)]
    pub from_mm: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub equation: Equation,
    #[arg(long)]
    pub method: Method,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub penalties: PenaltyArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// INI settings file; flags win over it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Write the solution as a MatrixMarket file.
    #[arg(long = "to-mm", value_name = "FILE")]
    pub to_mm: Option<PathBuf>,
    /// Leave the residual history out of the report.
    #[arg(long)]
    pub no_history: bool,
    /// Also write an SVG convergence plot.
    #[arg(long, value_name = "FILE")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub suite: String,
    /// Largest order to run.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// JSON summary destination.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub penalties: PenaltyArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub equation: Equation,
    #[arg(long, default_value = "admm")]
    pub method: Method,
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// `lo:hi` or a single value.
    #[arg(long, value_name = "RANGE")]
    pub alpha: ParamRange,
    #[arg(long, value_name = "RANGE")]
    pub beta: ParamRange,
    /// Third penalty, CARE ADMM only.
    #[arg(long, value_name = "RANGE")]
    pub gamma: Option<ParamRange>,
    /// Grid points per swept axis.
    #[arg(long, default_value_t = 3)]
    pub points: usize,
    /// Draw this many log-uniform samples instead of a grid.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum number of runs.
    #[arg(long, default_value_t = 64)]
    pub budget: usize,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// JSON report written by `solve`.
    #[arg(long, value_name = "FILE")]
    pub report: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Draw a tolerance line; defaults to the report's configured tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

/// A failure classified by exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Self { code: EXIT_USAGE, message: e.to_string() }
    }
}

impl From<Error> for Failure {
    /// Bad settings are usage errors; everything else raised while solving is
    /// a solver error.
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Config(_) => EXIT_USAGE,
            _ => EXIT_SOLVER_ERROR,
        };
        Self { code, message: e.to_string() }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            code
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Plot(a) => cmd_plot(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// Resolves the problem source plus any table settings for `method`.
fn resolve_source(p: &ProblemArgs, method: Method) -> Result<(ProblemSource, SolverSettings), Failure> {
    if !p.from_mm.is_empty() {
        return Ok((ProblemSource::files(p.from_mm.clone(), p.n.unwrap_or(0)), SolverSettings::default()));
    }
    let name = p
        .generator
        .as_deref()
        .or(p.suite.as_deref())
        .ok_or_else(|| Failure::usage("give a problem with --gen, --suite or --from-mm"))?;
    let n = match (p.n, name) {
        (Some(n), _) => n,
        (None, "t7" | "ammonia") => 9,
        (None, _) => return Err(Failure::usage("--n is required with --gen and --suite")),
    };
    let source = ProblemSource::generator(name, n).map_err(Failure::usage)?;
    let mut settings = SolverSettings::default();
    if let Some(table) = &p.suite {
        let rows = table_suite(table).map_err(Failure::usage)?;
        if let Some(row) = rows.iter().find(|r| r.method == method && r.source.order == n) {
            settings = row.settings.clone();
        }
    }
    Ok((source, settings))
}

fn problem_order(p: &Problem) -> usize {
    match p {
        Problem::Sylvester(s) => s.a().rows(),
        Problem::Lyapunov(l) => l.order(),
        Problem::Care(c) => c.order(),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(path: Option<&Path>, value: &impl serde::Serialize) -> Result<(), Failure> {
    let mut out = open_out(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::usage(e.to_string()))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| Failure::usage(e.to_string()))
}

fn cmd_solve(a: &SolveArgs) -> Result<i32, Failure> {
    if !a.equation.supports(a.method) {
        return Err(Failure::usage(format!("method '{}' does not apply to {} equations", a.method, a.equation)));
    }
    let (source, table_settings) = resolve_source(&a.problem, a.method)?;
    let problem = a.equation.build(&source).map_err(Failure::usage)?;
    let file_settings = match &a.config {
        Some(path) => load_settings(path, a.method).map_err(Failure::usage)?,
        None => SolverSettings::default(),
    };
    let settings = table_settings.merged(&file_settings).merged(&a.solver.settings(&a.penalties));
    let info = ProblemInfo { equation: a.equation, source: source.label(), order: problem_order(&problem) };

    let (report, config) = match run_solver(a.method, &problem, &settings) {
        Ok(v) => v,
        Err(e) => {
            if let Some(partial) = e.partial_report() {
                let cfg = serde_json::to_value(&settings).unwrap_or_default();
                let doc = JsonReport::new(a.method, info, cfg, partial, !a.no_history);
                write_json(a.out.as_deref(), &doc)?;
            }
            return Err(e.into());
        }
    };
    let doc = JsonReport::new(a.method, info, config, &report, !a.no_history);
    write_json(a.out.as_deref(), &doc)?;
    if let Some(path) = &a.to_mm {
        write_matrix_market(path, &report.solution).map_err(Failure::from)?;
    }
    if let Some(path) = &a.plot {
        let title = format!("{} on {}", a.method, doc.problem.source);
        write_svg(path, &title, &report.residual_history, history_stride(&doc), configured_tol(&doc))
            .map_err(Failure::from)?;
    }
    Ok(exit_code(report.termination))
}

fn cmd_bench(a: &BenchArgs) -> Result<i32, Failure> {
    let mut opts = BenchOptions {
        cap: a.cap,
        threads: a.threads,
        seed: a.seed,
        overrides: a.solver.settings(&a.penalties),
        ..BenchOptions::new(&a.suite)
    };
    if let Some(path) = &a.config {
        let methods: BTreeMap<Method, SolverSettings> = Method::ALL
            .into_iter()
            .map(|m| load_settings(path, m).map(|s| (m, s)))
            .collect::<Result<_, _>>()
            .map_err(Failure::usage)?;
        opts.method_overrides = methods;
    }
    let summary = run_bench(&opts).map_err(Failure::usage)?;
    write_csv(&summary.rows, open_out(a.csv.as_deref())?).map_err(Failure::from)?;
    if let Some(path) = &a.json {
        write_json(Some(path), &summary)?;
    }
    Ok(summary.exit_code())
}

fn cmd_sweep(a: &SweepArgs) -> Result<i32, Failure> {
    let (source, table_settings) = resolve_source(&a.problem, a.method)?;
    let problem = a.equation.build(&source).map_err(Failure::usage)?;
    let file_settings = match &a.config {
        Some(path) => load_settings(path, a.method).map_err(Failure::usage)?,
        None => SolverSettings::default(),
    };
    let base = table_settings.merged(&file_settings).merged(&a.solver.settings(&PenaltyArgs::default()));
    let sampling = match a.samples {
        Some(samples) => Sampling::LogRandom { samples, seed: a.seed },
        None => Sampling::Grid { points: a.points },
    };
    let opts = SweepOptions {
        method: a.method,
        base,
        alpha: a.alpha,
        beta: a.beta,
        gamma: a.gamma,
        sampling,
        budget: a.budget,
        threads: a.threads,
    };
    let result = run_sweep(&problem, &opts).map_err(Failure::usage)?;
    write_sweep_csv(&result, open_out(a.csv.as_deref())?).map_err(Failure::from)?;
    if let Some(path) = &a.json {
        write_json(Some(path), &result)?;
    }
    match result.best.map(|i| &result.points[i]) {
        Some(b) => {
            let gamma = b.gamma.map(|g| format!(" gamma={g}")).unwrap_or_default();
            eprintln!("best: alpha={} beta={}{gamma} iterations={}", b.alpha, b.beta, b.iterations.unwrap_or(0));
            Ok(0)
        }
        None => {
            eprintln!("no sweep point converged");
            Ok(exit_code(Termination::MaxIterations))
        }
    }
}

fn history_stride(doc: &JsonReport) -> usize {
    doc.detail.get("check_every").and_then(|v| v.as_u64()).map_or(1, |k| k.max(1) as usize)
}

fn configured_tol(doc: &JsonReport) -> Option<f64> {
    ["tol", "outer_tol", "epsilon"].iter().find_map(|k| doc.config.get(*k).and_then(|v| v.as_f64()))
}

fn cmd_plot(a: &PlotArgs) -> Result<i32, Failure> {
    let text = std::fs::read_to_string(&a.report).map_err(|e| Failure::usage(format!("{}: {e}", a.report.display())))?;
    let doc: JsonReport = serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", a.report.display())))?;
    let history = doc
        .residual_history
        .as_deref()
        .ok_or_else(|| Failure::usage("report has no residual_history; rerun solve without --no-history"))?;
    let title = format!("{} on {}", doc.method, doc.problem.source);
    write_svg(&a.out, &title, history, history_stride(&doc), a.tol.or_else(|| configured_tol(&doc)))
        .map_err(Failure::usage)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("matrixopt").chain(args.iter().copied()))
    }

    #[test]
    fn unknown_method_is_a_usage_error() {
        assert!(parse(&["solve", "care", "--method", "nosuch"]).is_err());
        assert_eq!(run_from_args(["matrixopt", "solve", "care", "--method", "nosuch"]), EXIT_USAGE);
        assert_eq!(run_from_args(["matrixopt", "frobnicate"]), EXIT_USAGE);
    }

    #[test]
    fn flags_map_onto_settings() {
        let cli = parse(&[
            "solve", "care", "--method", "newton-admm", "--suite", "t9", "--n", "16", "--alpha", "0.8", "--beta", "53.5",
            "--warm-start", "false", "--linesearch", "wolfe", "--mode", "vectorized",
        ])
        .unwrap();
        let Command::Solve(a) = cli.command else { panic!() };
        let s = a.solver.settings(&a.penalties);
        assert_eq!(s.alpha, Some(0.8));
        assert_eq!(s.warm_start, Some(false));
        assert_eq!(s.linesearch, Some(LineSearch::Wolfe));
        assert_eq!(s.mode, Some(QnMode::Vectorized));
        let (src, table) = resolve_source(&a.problem, a.method).unwrap();
        assert_eq!(src.order, 16);
        assert_eq!(table.tol, Some(1e-9));
    }

    #[test]
    fn generator_needs_an_order_except_ammonia() {
        let p = ProblemArgs { generator: Some("t5".into()), ..Default::default() };
        assert!(resolve_source(&p, Method::Dfp).is_err());
        let p = ProblemArgs { generator: Some("t7".into()), ..Default::default() };
        assert_eq!(resolve_source(&p, Method::Admm).unwrap().0.order, 9);
        assert!(resolve_source(&ProblemArgs::default(), Method::Dfp).is_err());
    }

    #[test]
    fn conflicting_sources_are_rejected() {
        assert!(parse(&["solve", "sylvester", "--method", "direct", "--gen", "t5", "--suite", "t5", "--n", "4"]).is_err());
    }

    #[test]
    fn solver_errors_and_usage_errors_differ() {
        assert_eq!(Failure::from(Error::Config("x".into())).code, EXIT_USAGE);
        assert_eq!(Failure::from(Error::Singular("x".into())).code, EXIT_SOLVER_ERROR);
    }
}
