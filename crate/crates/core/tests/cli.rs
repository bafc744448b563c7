use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ctp_alm::cli::{CheckReport, RunSummary};
use ctp_alm::diagnostics::CertificateKind;
use ctp_alm::problem::{akkt_example_sequence, builtin};
use ctp_alm::timegrid::Trajectory;

const BIN: &str = env!("CARGO_BIN_EXE_ctp-alm");
const OUTPUTS: [&str; 5] = [
    "iterations.csv",
    "trajectory.csv",
    "summary.json",
    "trajectory.svg",
    "residuals.svg",
];

fn ctp(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("CTP_ALM_THREADS", "2")
        .output()
        .unwrap()
}

fn solve_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = vec!["solve", "--out-dir", dir.to_str().unwrap()];
    all.extend_from_slice(args);
    ctp(&all)
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn ex1_solve_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_in(dir.path(), &["--problem", "ex1", "--nodes", "85", "--x0", "1,1", "--v0", "1,1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for name in OUTPUTS {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());

    let summary: RunSummary = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!(summary.error_metrics.unwrap().sup_error <= 1e-3);

    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,x2,v1,v2");
    assert_eq!(lines.count(), 85);

    let log = fs::read_to_string(dir.path().join("iterations.csv")).unwrap();
    assert_eq!(
        log.lines().next().unwrap(),
        "k,rho,stationarity_l1,complementarity_sup,infeas_measure,objective,inner_status,inner_max_grad"
    );
    assert_eq!(log.lines().count(), summary.outer_iterations + 1);

    let svg = fs::read_to_string(dir.path().join("trajectory.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(!svg.contains("href"));
}

#[test]
fn summary_json_round_trips_bytewise() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_in(dir.path(), &["--problem", "ex4", "--x0", "1,1", "--v0", "1,1,1,1,1", "--max-outer", "20"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("summary.json")).unwrap();
    let parsed: RunSummary = serde_json::from_str(&text).unwrap();
    assert_eq!(ctp_alm::cli::summary_json(&parsed), text);
}

#[test]
fn ex4_solve_is_certified_globally_optimal() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_in(dir.path(), &["--problem", "ex4", "--nodes", "85", "--x0", "1,1", "--v0", "1,1,1,1,1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary: RunSummary = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.certificates.sufficiency.kind, CertificateKind::GlobalOptimalByConvexity);
    assert_eq!(summary.error_metrics.unwrap().masked_nodes, vec![42]);
}

#[test]
fn max_outer_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_in(dir.path(), &["--problem", "ex3", "--x0", "0.5,0.5,0.5", "--u0", "1", "--v0", "1,1", "--max-outer", "3", "--nodes", "11"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unknown_problem_lists_valid_names() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_in(dir.path(), &["--problem", "nosuch"]);
    assert_eq!(code(&out), 64);
    let msg = stderr(&out);
    for name in ["ex1", "ex2", "ex3", "ex4", "akkt_example", "infeasible1"] {
        assert!(msg.contains(name), "{msg}");
    }
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(code(&ctp(&["solve", "--problem", "ex1", "--gamma", "abc"])), 64);
    assert_eq!(code(&ctp(&["solve", "--problem", "ex1", "--bogus"])), 64);
    assert_eq!(code(&ctp(&["frobnicate"])), 64);
    assert_eq!(code(&ctp(&["solve", "--problem", "ex1", "--tau", "2"])), 64);
    let out = Command::new(BIN)
        .args(["solve", "--problem", "ex1"])
        .env("CTP_ALM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&out), 64);
}

#[test]
fn dimension_mismatch_exits_65_naming_the_spec() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_in(dir.path(), &["--problem", "ex1", "--v0", "1,1,1"]);
    assert_eq!(code(&out), 65);
    assert!(stderr(&out).contains("--v0"));

    let csv = dir.path().join("x0.csv");
    let grid = builtin("ex1").unwrap().grid(10).unwrap();
    Trajectory::zeros(&grid, 3).save_csv(&csv).unwrap();
    let out = solve_in(dir.path(), &["--problem", "ex1", "--nodes", "10", "--x0", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 65);
    assert!(stderr(&out).contains("--x0"));
}

#[test]
fn initial_state_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x0.csv");
    let grid = builtin("ex1").unwrap().grid(21).unwrap();
    Trajectory::from_fn(&grid, 2, |t| vec![1.0 + t, 1.0]).unwrap().save_csv(&csv).unwrap();
    let out = solve_in(dir.path(), &["--problem", "ex1", "--nodes", "21", "--x0", csv.to_str().unwrap(), "--v0", "1,1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn failed_commit_leaves_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // a non-empty directory where summary.json should go blocks its rename
    fs::create_dir_all(dir.path().join("summary.json/keep")).unwrap();
    let out = solve_in(dir.path(), &["--problem", "ex1", "--x0", "1,1", "--v0", "1,1", "--nodes", "11"]);
    assert_eq!(code(&out), 74, "{}", stderr(&out));
    let names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec!["summary.json".to_string()]);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"problem": "ex2", "nodes": 21, "x0": "0.5,0.5", "v0": [1, 1, 1], "max_outer": 1}"#).unwrap();
    let out = solve_in(dir.path(), &["--config", cfg.to_str().unwrap(), "--max-outer", "1000"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary: RunSummary = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.problem, "ex2");
    assert_eq!(summary.nodes, 21);
    assert_eq!(summary.config.max_outer, 1000);
}

fn check_json(out: &Output) -> CheckReport {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn check_akkt_fixture_fails_complementarity() {
    let dir = tempfile::tempdir().unwrap();
    let grid = builtin("akkt_example").unwrap().grid(84).unwrap();
    let (x, v) = akkt_example_sequence(&grid, 100).unwrap();
    let (xp, vp) = (dir.path().join("x.csv"), dir.path().join("v.csv"));
    x.save_csv(&xp).unwrap();
    v.save_csv(&vp).unwrap();
    let out = ctp(&["check", "--problem", "akkt_example", "--trajectory", xp.to_str().unwrap(), "--multipliers", vp.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    let report = check_json(&out);
    assert!(report.residuals.stationarity_l1 <= 1e-12);
    assert!((report.residuals.complementarity_sup - 0.25 / 300.0).abs() < 1e-12);
    assert!(!report.akkt_satisfied);
}

#[test]
fn check_reference_ex1_with_split_multipliers_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("combined.csv");
    fs::write(&path, "t,x1,x2,v1,v2\n0,0,0,0.5,0.5\n0.5,0,0,0.5,0.5\n1,0,0,0.5,0.5\n").unwrap();
    let out = ctp(&["check", "--problem", "ex1", "--trajectory", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = check_json(&out);
    assert_eq!(report.residuals.stationarity_l1, 0.0);
    assert!(report.certificates.infeasibility.is_none());
}

#[test]
fn check_accepts_solve_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_in(dir.path(), &["--problem", "ex2", "--x0", "0.5,0.5", "--v0", "1,1,1"]);
    assert_eq!(code(&out), 0);
    let traj = dir.path().join("trajectory.csv");
    let out = ctp(&["check", "--problem", "ex2", "--trajectory", traj.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn check_rejects_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out = ctp(&["check", "--problem", "ex1", "--trajectory", empty.to_str().unwrap()]);
    assert_eq!(code(&out), 65);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "t,x1,x2,v1,v2\n0,0,0,1,1\n0.5,0,oops,1,1\n1,0,0,1,1\n").unwrap();
    let out = ctp(&["check", "--problem", "ex1", "--trajectory", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 65);
    assert!(stderr(&out).contains(":3:"), "{}", stderr(&out));

    let short = dir.path().join("short.csv");
    fs::write(&short, "t,x1,x2\n0,0,0\n1,0,0\n").unwrap();
    let out = ctp(&["check", "--problem", "ex1", "--trajectory", short.to_str().unwrap()]);
    assert_eq!(code(&out), 65);

    let neg = dir.path().join("neg.csv");
    fs::write(&neg, "t,x1,x2,v1,v2\n0,0,0,-1,1\n1,0,0,1,1\n").unwrap();
    let out = ctp(&["check", "--problem", "ex1", "--trajectory", neg.to_str().unwrap()]);
    assert_eq!(code(&out), 65);
}

#[test]
fn list_problems_prints_registry() {
    let out = ctp(&["list-problems"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().any(|l| l == "ex3  n=3 p=1 m=2 T=1 ref=yes"));
    assert!(text.contains("infeasible1"));
}

#[test]
fn help_exits_zero() {
    let out = ctp(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("list-problems"));
}
