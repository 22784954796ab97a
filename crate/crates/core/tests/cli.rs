//! End-to-end runs of the `matrixopt` binary.

use std::path::Path;
use std::process::{Command, Output};

use matrixopt::problems::{read_matrix_market, write_matrix_market};
use matrixopt::sylvester_oracle::{solve_kronecker_direct, sylvester_residual};
use matrixopt::{Matrix, SylvesterProblem};
use serde_json::Value;

fn matrixopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matrixopt"))
        .args(args)
        .env_remove("MATRIXOPT_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_report_has_the_documented_fields() {
    let o = matrixopt(&["solve", "sylvester", "--method", "ccom", "--gen", "t3", "--n", "10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    for key in ["method", "problem", "config", "iterations", "final_residual", "residual_history", "termination", "wall_time_seconds", "detail"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["method"], "ccom");
    assert_eq!(v["termination"], "converged");
    assert!(v["final_residual"].as_f64().unwrap() <= 1e-8);
    assert!(v["detail"].is_object());

    let o = matrixopt(&["solve", "sylvester", "--method", "ccom", "--gen", "t3", "--n", "10", "--no-history"]);
    assert!(json(&o).get("residual_history").is_none());
}

#[test]
fn exit_codes_follow_the_termination() {
    let hit_cap = matrixopt(&["solve", "care", "--method", "admm", "--gen", "t8", "--n", "8", "--max-iterations", "3"]);
    assert_eq!(code(&hit_cap), 2);
    assert_eq!(json(&hit_cap)["termination"], "max_iterations");

    assert_eq!(code(&matrixopt(&["solve", "care", "--method", "nosuch", "--gen", "t8", "--n", "8"])), 1);
    assert_eq!(code(&matrixopt(&["frobnicate"])), 1);
    assert_eq!(code(&matrixopt(&["solve", "care", "--method", "admm", "--gen", "t8", "--n", "8", "--alpha", "-1"])), 1);
    assert_eq!(code(&matrixopt(&["--help"])), 0);

    // a Riccati family asked for as a Sylvester problem
    assert_eq!(code(&matrixopt(&["solve", "sylvester", "--method", "cg", "--gen", "t8", "--n", "4"])), 1);
}

#[test]
fn solver_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let a = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
    let b = Matrix::identity(2);
    let c = Matrix::identity(2);
    for (name, m) in [("a", &a), ("b", &b), ("c", &c)] {
        write_matrix_market(dir.path().join(format!("{name}.mtx")), m).unwrap();
    }
    let files: Vec<String> = ["a", "b", "c"].iter().map(|n| p(&dir.path().join(format!("{n}.mtx"))).to_string()).collect();
    let o = matrixopt(&["solve", "sylvester", "--method", "cg", "--from-mm", &files[0], &files[1], &files[2]]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!o.stderr.is_empty());
}

#[test]
fn matrix_market_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = Matrix::from_rows(&[[4.0, 1.0, 0.0], [0.5, 3.0, 0.2], [0.0, -0.3, 5.0]]).unwrap();
    let b = Matrix::from_rows(&[[2.0, 0.1], [0.0, 1.5]]).unwrap();
    let c = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
    let paths: Vec<_> = ["a", "b", "c"].iter().map(|n| dir.path().join(format!("{n}.mtx"))).collect();
    for (path, m) in paths.iter().zip([&a, &b, &c]) {
        write_matrix_market(path, m).unwrap();
    }
    let out = dir.path().join("x.mtx");
    let o = matrixopt(&["solve", "sylvester", "--method", "direct", "--from-mm", p(&paths[0]), p(&paths[1]), p(&paths[2]), "--to-mm", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let x = read_matrix_market(&out).unwrap();
    let problem = SylvesterProblem::new(a, b, c).unwrap();
    let reference = solve_kronecker_direct(&problem).unwrap();
    assert!((&x - &reference).frobenius_norm() <= 1e-12 * reference.frobenius_norm());
    assert!(sylvester_residual(&problem, &x).unwrap() <= 1e-12);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    std::fs::write(&cfg, "max-iterations = 5\n\n[admm]\nalpha = 0.91\nbeta = 2.8\ngamma = 0.0014\n").unwrap();
    let base = ["solve", "care", "--method", "admm", "--gen", "t8", "--n", "8", "--config", p(&cfg)];

    let from_file = matrixopt(&base);
    assert_eq!(code(&from_file), 2);
    let v = json(&from_file);
    assert_eq!(v["iterations"], 5);
    assert_eq!(v["config"]["alpha"], 0.91);

    let mut with_flag = base.to_vec();
    with_flag.extend(["--max-iterations", "7", "--alpha", "0.5"]);
    let v = json(&matrixopt(&with_flag));
    assert_eq!(v["iterations"], 7);
    assert_eq!(v["config"]["alpha"], 0.5);
    assert_eq!(v["config"]["beta"], 2.8);

    std::fs::write(&cfg, "speed = 11\n").unwrap();
    assert_eq!(code(&matrixopt(&base)), 1);
}

#[test]
fn bench_writes_the_csv_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t3.csv");
    let o = matrixopt(&["bench", "--suite", "t3", "--cap", "10", "--csv", p(&csv)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "algorithm,n,iterations,final_residual,wall_time_seconds,paper_iterations,paper_error");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "CCOM");
    assert_eq!(row[1], "10");
    assert!(row[3].parse::<f64>().unwrap() <= 1e-8);
    assert_eq!(row[5], "1");
    assert!(lines.next().is_none());
}

#[test]
fn thread_variable_caps_the_pool() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.json");
    let o = Command::new(env!("CARGO_BIN_EXE_matrixopt"))
        .args(["bench", "--suite", "t3", "--cap", "10", "--threads", "8", "--csv", p(&dir.path().join("x.csv")), "--json", p(&summary)])
        .env("MATRIXOPT_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(v["threads"], 2);
}

#[test]
fn plot_renders_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let svg = dir.path().join("r.svg");
    let o = matrixopt(&["solve", "care", "--method", "admm", "--gen", "t8", "--n", "8", "--alpha", "0.91", "--beta", "2.8", "--gamma", "0.0014", "--out", p(&report)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = matrixopt(&["plot", "--report", p(&report), "--out", p(&svg)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert!(text.contains("class=\"residual\""));
    assert!(text.contains("class=\"tolerance\""));

    assert_eq!(code(&matrixopt(&["plot", "--report", p(&dir.path().join("missing.json")), "--out", p(&svg)])), 1);
}

#[test]
fn sweep_reports_the_best_point() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = matrixopt(&[
        "sweep", "care", "--method", "newton-admm", "--gen", "t9", "--n", "8", "--alpha", "0.8", "--beta", "40:60", "--points", "2", "--csv", p(&csv),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
}
