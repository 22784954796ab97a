//! Penalty-parameter sweeps for the ADMM-based solvers.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{equation_of, run_solver, thread_pool};
use crate::error::{Error, Result};
use crate::problems::{Method, Problem, SolverSettings};
use crate::report::Termination;

pub const SWEEP_CSV_HEADER: [&str; 8] =
    ["alpha", "beta", "gamma", "iterations", "final_residual", "termination", "wall_time_seconds", "best"];

/// A closed positive interval, written `lo:hi` or a single value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub lo: f64,
    pub hi: f64,
}

impl ParamRange {
    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.lo > 0.0 && self.hi >= self.lo && self.hi.is_finite()) {
            return Err(Error::Config(format!("{name} range must satisfy 0 < lo <= hi, got {self}")));
        }
        Ok(())
    }

    fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// `k` geometrically spaced values; one value for a point range.
    pub fn grid(&self, k: usize) -> Vec<f64> {
        if self.is_point() || k <= 1 {
            return vec![if self.is_point() { self.lo } else { (self.lo * self.hi).sqrt() }];
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        (0..k).map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp()).collect()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.is_point() {
            return self.lo;
        }
        rng.gen_range(self.lo.ln()..=self.hi.ln()).exp()
    }
}

impl fmt::Display for ParamRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}:{}", self.lo, self.hi)
        }
    }
}

impl FromStr for ParamRange {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad range '{s}'")));
        match s.split_once(':') {
            Some((lo, hi)) => Ok(Self { lo: num(lo)?, hi: num(hi)? }),
            None => Ok(Self::point(num(s)?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    /// `points` geometrically spaced values per swept axis.
    Grid { points: usize },
    /// `samples` draws, log-uniform on every axis.
    LogRandom { samples: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub method: Method,
    pub base: SolverSettings,
    pub alpha: ParamRange,
    pub beta: ParamRange,
    /// Only the four-block CARE ADMM has a third penalty.
    pub gamma: Option<ParamRange>,
    pub sampling: Sampling,
    /// Upper bound on the number of runs.
    pub budget: usize,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: Option<f64>,
    pub iterations: Option<usize>,
    pub final_residual: Option<f64>,
    pub termination: Termination,
    pub wall_time_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Index of the converged point with the fewest iterations.
    pub best: Option<usize>,
}

fn uses_gamma(problem: &Problem, method: Method) -> bool {
    method == Method::Admm && matches!(problem, Problem::Care(_))
}

fn plan(opts: &SweepOptions, with_gamma: bool) -> Vec<(f64, f64, Option<f64>)> {
    let gamma = opts.gamma.filter(|_| with_gamma);
    match opts.sampling {
        Sampling::Grid { points } => {
            let gs: Vec<Option<f64>> = match gamma {
                Some(g) => g.grid(points).into_iter().map(Some).collect(),
                None => vec![None],
            };
            let mut out = Vec::new();
            for a in opts.alpha.grid(points) {
                for b in opts.beta.grid(points) {
                    for g in &gs {
                        out.push((a, b, *g));
                    }
                }
            }
            out
        }
        Sampling::LogRandom { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples)
                .map(|_| {
                    let a = opts.alpha.sample(&mut rng);
                    let b = opts.beta.sample(&mut rng);
                    (a, b, gamma.map(|g| g.sample(&mut rng)))
                })
                .collect()
        }
    }
}

pub fn run_sweep(problem: &Problem, opts: &SweepOptions) -> Result<SweepResult> {
    if opts.budget == 0 {
        return Err(Error::Config("budget must be at least 1".into()));
    }
    if !matches!(opts.method, Method::Admm | Method::NewtonAdmm) {
        return Err(Error::Config(format!("sweeps apply to admm and newton-admm, not '{}'", opts.method)));
    }
    let eq = equation_of(problem);
    if !eq.supports(opts.method) {
        return Err(Error::Config(format!("method '{}' does not apply to {eq} equations", opts.method)));
    }
    match opts.sampling {
        Sampling::Grid { points: 0 } | Sampling::LogRandom { samples: 0, .. } => {
            return Err(Error::Config("a sweep needs at least one point".into()))
        }
        _ => {}
    }
    opts.alpha.validate("alpha")?;
    opts.beta.validate("beta")?;
    if let Some(g) = &opts.gamma {
        g.validate("gamma")?;
    }
    let with_gamma = uses_gamma(problem, opts.method);
    let mut points = plan(opts, with_gamma);
    if points.len() > opts.budget {
        log::warn!("sweep planned {} points, truncating to the budget of {}", points.len(), opts.budget);
        points.truncate(opts.budget);
    }

    let pool = thread_pool(opts.threads)?;
    let results: Vec<SweepPoint> = pool.install(|| {
        points
            .par_iter()
            .map(|&(alpha, beta, gamma)| {
                let settings = SolverSettings { alpha: Some(alpha), beta: Some(beta), gamma: gamma.or(opts.base.gamma), ..opts.base.clone() };
                let start = std::time::Instant::now();
                match run_solver(opts.method, problem, &settings) {
                    Ok((r, cfg)) => SweepPoint {
                        alpha,
                        beta,
                        gamma: if with_gamma { cfg.get("gamma").and_then(|v| v.as_f64()) } else { None },
                        iterations: Some(r.iterations),
                        final_residual: Some(r.final_residual),
                        termination: r.termination,
                        wall_time_seconds: r.wall_time_seconds,
                        error: None,
                    },
                    Err(e) => SweepPoint {
                        alpha,
                        beta,
                        gamma: gamma.filter(|_| with_gamma),
                        iterations: e.partial_report().map(|p| p.iterations),
                        final_residual: e.partial_report().map(|p| p.final_residual),
                        termination: Termination::Error,
                        wall_time_seconds: start.elapsed().as_secs_f64(),
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    let best = results
        .iter()
        .enumerate()
        .filter(|(_, p)| p.termination == Termination::Converged)
        .min_by(|(_, a), (_, b)| {
            a.iterations.cmp(&b.iterations).then(a.final_residual.partial_cmp(&b.final_residual).unwrap_or(std::cmp::Ordering::Equal))
        })
        .map(|(i, _)| i);
    Ok(SweepResult { points: results, best })
}

pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(SWEEP_CSV_HEADER).map_err(csv_err)?;
    for (i, p) in result.points.iter().enumerate() {
        w.write_record([
            p.alpha.to_string(),
            p.beta.to_string(),
            p.gamma.map(|g| g.to_string()).unwrap_or_default(),
            p.iterations.map(|v| v.to_string()).unwrap_or_default(),
            p.final_residual.map(|v| format!("{v:e}")).unwrap_or_default(),
            p.termination.to_string(),
            format!("{:.6}", p.wall_time_seconds),
            (result.best == Some(i)).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Equation;
    use crate::problems::ProblemSource;

    fn t8(n: usize) -> Problem {
        Equation::Care.build(&ProblemSource::generator("t8", n).unwrap()).unwrap()
    }

    fn opts(sampling: Sampling) -> SweepOptions {
        SweepOptions {
            method: Method::Admm,
            base: SolverSettings::default(),
            alpha: ParamRange { lo: 0.5, hi: 2.0 },
            beta: ParamRange::point(2.8),
            gamma: Some(ParamRange::point(0.0014)),
            sampling,
            budget: 100,
            threads: Some(2),
        }
    }

    #[test]
    fn range_parsing_and_grids() {
        let r: ParamRange = "0.1:10".parse().unwrap();
        let g = r.grid(3);
        assert!((g[1] - 1.0).abs() < 1e-12);
        assert_eq!("2.5".parse::<ParamRange>().unwrap().grid(5), vec![2.5]);
        assert!("a:b".parse::<ParamRange>().is_err());
    }

    #[test]
    fn zero_budget_is_a_usage_error() {
        let o = SweepOptions { budget: 0, ..opts(Sampling::Grid { points: 3 }) };
        assert!(matches!(run_sweep(&t8(4), &o), Err(Error::Config(_))));
    }

    #[test]
    fn single_point_matches_a_direct_solve() {
        let o = SweepOptions { alpha: ParamRange::point(0.91), ..opts(Sampling::Grid { points: 4 }) };
        let p = t8(8);
        let res = run_sweep(&p, &o).unwrap();
        assert_eq!(res.points.len(), 1);
        let s = SolverSettings { alpha: Some(0.91), beta: Some(2.8), gamma: Some(0.0014), ..Default::default() };
        let (direct, _) = run_solver(Method::Admm, &p, &s).unwrap();
        assert_eq!(res.points[0].iterations, Some(direct.iterations));
        assert_eq!(res.points[0].final_residual, Some(direct.final_residual));
        assert_eq!(res.best, Some(0));
    }

    #[test]
    fn random_sampling_is_seeded_and_budgeted() {
        let o = SweepOptions { budget: 3, ..opts(Sampling::LogRandom { samples: 5, seed: 9 }) };
        let a = run_sweep(&t8(4), &o).unwrap();
        let b = run_sweep(&t8(4), &o).unwrap();
        assert_eq!(a.points.len(), 3);
        let key = |p: &SweepPoint| (p.alpha, p.beta, p.gamma, p.iterations, p.final_residual);
        assert_eq!(a.points.iter().map(key).collect::<Vec<_>>(), b.points.iter().map(key).collect::<Vec<_>>());
        for p in &a.points {
            assert!((0.5..=2.0).contains(&p.alpha));
        }
    }

    #[test]
    fn gamma_is_ignored_without_a_third_block() {
        let p = Equation::Care.build(&ProblemSource::generator("t9", 4).unwrap()).unwrap();
        let o = SweepOptions {
            method: Method::NewtonAdmm,
            alpha: ParamRange::point(0.8),
            beta: ParamRange { lo: 40.0, hi: 60.0 },
            ..opts(Sampling::Grid { points: 2 })
        };
        let res = run_sweep(&p, &o).unwrap();
        assert_eq!(res.points.len(), 2);
        assert!(res.points.iter().all(|q| q.gamma.is_none()));
    }
}
