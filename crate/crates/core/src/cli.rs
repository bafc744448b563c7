//! Command-line frontend: `solve`, `check` and `list-problems`.
//!
//! Exit codes: `solve` returns 0, 2 or 3 for `AkktConverged`,
//! `MaxOuterReached` and `InnerFailure`; `check` returns 0 when both AKKT
//! residuals are within tolerance and 1 otherwise. Usage errors exit with
//! 64, malformed or mismatched input data with 65, unreadable input files
//! with 66, solver evaluation failures with 70 and output failures with 74.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::alm::{self, AlmConfig, Certificates, IterationRecord, SolveReport, SolveStatus, ITERATION_CSV_HEADER};
use crate::diagnostics::{
    akkt_certificate, infeasibility_report, solution_error, sufficiency_certificate, ErrorMetrics, Tolerances,
};
use crate::error::Error;
use crate::lagrangian::{akkt_residuals, feasibility_factor, feasibility_stationarity_residual, max_violation, Residuals};
use crate::problem::{builtin, ProblemDefinition, BUILTIN_NAMES};
use crate::svg::{line_chart, Series};
use crate::timegrid::{fmt_f64, TimeGrid, Trajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_MAX_OUTER: i32 = 2;
pub const EXIT_INNER_FAILURE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

/// Environment variable capping the number of worker threads (0 = auto).
pub const THREADS_ENV: &str = "CTP_ALM_THREADS";

pub const DEFAULT_NODES: usize = 85;

#[derive(Debug, Parser)]
#[command(name = "ctp-alm", version, about = "Augmented Lagrangian solver for continuous-time programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Solve a built-in problem and write logs, the final iterate and plots.
    Solve(SolveArgs),
    /// Evaluate AKKT residuals and certificates for a given trajectory.
    Check(CheckArgs),
    /// List the built-in problems.
    ListProblems,
}

#[derive(Debug, Args, Default)]
struct SolveArgs {
    #[arg(long)]
    problem: Option<String>,
    /// Number of grid nodes.
    #[arg(long)]
    nodes: Option<usize>,
    /// Initial state: a constant vector like `1,1` or a CSV path.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Initial safeguarded equality multipliers (constant vector or CSV).
    #[arg(long, allow_hyphen_values = true)]
    u0: Option<String>,
    /// Initial safeguarded inequality multipliers (constant vector or CSV).
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    /// Stopping tolerance for both AKKT residuals.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    bound_m: Option<f64>,
    #[arg(long)]
    bound_n: Option<f64>,
    /// Inner gradient tolerance; defaults to max(1e-8, eps/10).
    #[arg(long)]
    inner_tol: Option<f64>,
    #[arg(long)]
    inner_max_iters: Option<usize>,
    /// Worker threads (0 = auto); overrides the environment.
    #[arg(long)]
    threads: Option<usize>,
    /// JSON file with the same keys as the flags (underscored); flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    problem: String,
    /// CSV with columns `t,x1..xn` or, without --multipliers, `t,x..,u..,v..`.
    #[arg(long)]
    trajectory: PathBuf,
    /// CSV with columns `t,u1..up,v1..vm`.
    #[arg(long)]
    multipliers: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
}

/// Keys accepted by `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    problem: Option<String>,
    nodes: Option<usize>,
    x0: Option<SpecValue>,
    u0: Option<SpecValue>,
    v0: Option<SpecValue>,
    out_dir: Option<PathBuf>,
    rho0: Option<f64>,
    gamma: Option<f64>,
    tau: Option<f64>,
    eps: Option<f64>,
    max_outer: Option<usize>,
    bound_m: Option<f64>,
    bound_n: Option<f64>,
    inner_tol: Option<f64>,
    inner_max_iters: Option<usize>,
    threads: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SpecValue {
    Numbers(Vec<f64>),
    Text(String),
}

impl SpecValue {
    fn into_spec(self) -> VectorSpec {
        match self {
            SpecValue::Numbers(v) => VectorSpec::Constant(v),
            SpecValue::Text(s) => VectorSpec::parse(&s),
        }
    }
}

/// An initial trajectory: a vector broadcast over all nodes, or a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorSpec {
    Constant(Vec<f64>),
    Csv(PathBuf),
}

impl VectorSpec {
    /// Comma-separated numbers give a constant; anything else is a path.
    pub fn parse(s: &str) -> Self {
        let s = s.trim();
        if s.is_empty() {
            return VectorSpec::Constant(Vec::new());
        }
        let numbers: Option<Vec<f64>> = s.split(',').map(|f| f.trim().parse().ok()).collect();
        match numbers {
            Some(v) => VectorSpec::Constant(v),
            None => VectorSpec::Csv(PathBuf::from(s)),
        }
    }

    fn resolve(&self, flag: &str, grid: &TimeGrid, dim: usize, problem: &str) -> Result<Trajectory, CliError> {
        let mismatch = |got: usize| {
            CliError::new(
                EXIT_DATA,
                format!("--{flag} has {got} components but problem `{problem}` needs {dim}"),
            )
        };
        match self {
            VectorSpec::Constant(v) => {
                if v.len() != dim {
                    return Err(mismatch(v.len()));
                }
                Trajectory::constant(grid, v).map_err(|e| CliError::new(EXIT_DATA, format!("--{flag}: {e}")))
            }
            VectorSpec::Csv(path) => {
                let traj = Trajectory::load_csv(path).map_err(|e| CliError::from_error(&e))?;
                if traj.dim() != dim {
                    return Err(mismatch(traj.dim()));
                }
                if !same_grid(traj.grid(), grid) {
                    return Err(CliError::new(
                        EXIT_DATA,
                        format!(
                            "--{flag} ({}) has {} nodes on [0, {}], expected {} nodes on [0, {}]",
                            path.display(),
                            traj.node_count(),
                            traj.grid().horizon(),
                            grid.node_count(),
                            grid.horizon()
                        ),
                    ));
                }
                Trajectory::new(grid.clone(), dim, traj.values().to_vec()).map_err(|e| CliError::from_error(&e))
            }
        }
    }
}

fn same_grid(a: &TimeGrid, b: &TimeGrid) -> bool {
    a.node_count() == b.node_count() && (a.horizon() - b.horizon()).abs() <= 1e-9 * b.horizon()
}

/// Fully resolved settings of a `solve` run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem_name: String,
    pub nodes: usize,
    pub alm: AlmConfig,
    pub x0_spec: VectorSpec,
    pub u0_spec: VectorSpec,
    pub v0_spec: VectorSpec,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn from_error(e: &Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::NotFound { .. } | Error::Unsupported(_) => EXIT_USAGE,
            Error::Parse { .. } => EXIT_DATA,
            Error::Io { .. } => EXIT_NO_INPUT,
            Error::Evaluation { .. } => EXIT_SOFTWARE,
        };
        Self::new(code, e.to_string())
    }
}

/// Summary written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub nodes: usize,
    pub horizon: f64,
    pub status: SolveStatus,
    pub outer_iterations: usize,
    pub final_rho: f64,
    pub residuals: Residuals,
    pub objective: f64,
    pub infeas_measure: f64,
    pub max_violation: f64,
    pub certificates: Certificates,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error_metrics: Option<ErrorMetrics>,
    pub config: AlmConfig,
}

/// Output of `check`, printed as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub problem: String,
    pub nodes: usize,
    pub eps: f64,
    pub akkt_satisfied: bool,
    pub residuals: Residuals,
    pub max_violation: f64,
    pub theta: f64,
    pub theta_stationarity: f64,
    pub certificates: Certificates,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Solve(args) => resolve_run_config(args).and_then(|cfg| cmd_solve(&cfg)),
        Command::Check(args) => cmd_check(&args),
        Command::ListProblems => {
            print!("{}", list_table());
            Ok(EXIT_OK)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::new(EXIT_USAGE, msg)
}

fn resolve_run_config(args: SolveArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::new(EXIT_NO_INPUT, format!("{}: {e}", path.display())))?;
            serde_json::from_str::<ConfigFile>(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };

    let problem_name = args
        .problem
        .or(file.problem)
        .ok_or_else(|| usage(format!("--problem is required (one of: {})", BUILTIN_NAMES.join(", "))))?;
    let nodes = args.nodes.or(file.nodes).unwrap_or(DEFAULT_NODES);
    let eps = args.eps.or(file.eps).unwrap_or(1e-5);

    let mut alm = AlmConfig::with_eps(eps);
    if let Some(v) = args.rho0.or(file.rho0) {
        alm.rho_init = v;
    }
    if let Some(v) = args.gamma.or(file.gamma) {
        alm.gamma = v;
    }
    if let Some(v) = args.tau.or(file.tau) {
        alm.tau = v;
    }
    if let Some(v) = args.max_outer.or(file.max_outer) {
        alm.max_outer = v;
    }
    if let Some(v) = args.bound_m.or(file.bound_m) {
        alm.bound_m = v;
    }
    if let Some(v) = args.bound_n.or(file.bound_n) {
        alm.bound_n = v;
    }
    if let Some(v) = args.inner_tol.or(file.inner_tol) {
        alm.inner.grad_tol = v;
    }
    if let Some(v) = args.inner_max_iters.or(file.inner_max_iters) {
        alm.inner.max_iters = v;
    }
    alm.threads = match args.threads.or(file.threads) {
        Some(n) => n,
        None => threads_from_env()?,
    };
    alm.validate().map_err(|e| CliError::from_error(&e))?;

    let spec = |flag: Option<String>, from_file: Option<SpecValue>| {
        flag.map(|s| VectorSpec::parse(&s)).or_else(|| from_file.map(SpecValue::into_spec))
    };
    let x0_spec = spec(args.x0, file.x0);
    let u0_spec = spec(args.u0, file.u0);
    let v0_spec = spec(args.v0, file.v0);

    let problem = builtin(&problem_name).map_err(|e| CliError::from_error(&e))?;
    Ok(RunConfig {
        nodes,
        alm,
        x0_spec: x0_spec.unwrap_or_else(|| VectorSpec::Constant(vec![0.0; problem.n()])),
        u0_spec: u0_spec.unwrap_or_else(|| VectorSpec::Constant(vec![1.0; problem.p()])),
        v0_spec: v0_spec.unwrap_or_else(|| VectorSpec::Constant(vec![1.0; problem.m()])),
        out_dir: args.out_dir.or(file.out_dir).unwrap_or_else(|| PathBuf::from(".")),
        problem_name,
    })
}

fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse()
            .map_err(|_| usage(format!("{THREADS_ENV} must be a nonnegative integer, got `{s}`"))),
        _ => Ok(0),
    }
}

const OUTPUT_FILES: [&str; 5] = [
    "iterations.csv",
    "trajectory.csv",
    "summary.json",
    "trajectory.svg",
    "residuals.svg",
];

/// Output files staged under temporary names and renamed together.
struct Staging {
    dir: PathBuf,
    tag: String,
}

impl Staging {
    fn tmp(&self, name: &str) -> PathBuf {
        self.dir.join(format!(".{name}.{}.tmp", self.tag))
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.tmp(name);
        fs::write(&path, contents).map_err(|e| io_failure(&path, e))
    }

    /// Renames every staged file into place. If one rename fails, the
    /// files already moved by this call are removed again.
    fn commit(&self) -> Result<(), CliError> {
        for (done, name) in OUTPUT_FILES.iter().enumerate() {
            let (from, to) = (self.tmp(name), self.dir.join(name));
            if let Err(e) = fs::rename(&from, &to) {
                for moved in &OUTPUT_FILES[..done] {
                    let _ = fs::remove_file(self.dir.join(moved));
                }
                return Err(io_failure(&to, e));
            }
        }
        Ok(())
    }

    fn discard(&self) {
        for name in OUTPUT_FILES {
            let _ = fs::remove_file(self.tmp(name));
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> CliError {
    CliError::new(EXIT_IO, format!("{}: {e}", path.display()))
}

/// Runs a solve and writes all outputs; returns the status exit code.
pub fn cmd_solve(cfg: &RunConfig) -> Result<i32, CliError> {
    let problem = builtin(&cfg.problem_name).map_err(|e| CliError::from_error(&e))?;
    let grid = problem.grid(cfg.nodes).map_err(|e| CliError::from_error(&e))?;
    let x0 = cfg.x0_spec.resolve("x0", &grid, problem.n(), problem.name())?;
    let u0 = cfg.u0_spec.resolve("u0", &grid, problem.p(), problem.name())?;
    let v0 = cfg.v0_spec.resolve("v0", &grid, problem.m(), problem.name())?;

    fs::create_dir_all(&cfg.out_dir).map_err(|e| io_failure(&cfg.out_dir, e))?;
    let staging = Staging {
        dir: cfg.out_dir.clone(),
        tag: std::process::id().to_string(),
    };
    let result = solve_and_stage(&problem, cfg, &staging, &x0, &u0, &v0).and_then(|code| {
        staging.commit()?;
        Ok(code)
    });
    if result.is_err() {
        staging.discard();
    }
    result
}

fn solve_and_stage(
    problem: &ProblemDefinition,
    cfg: &RunConfig,
    staging: &Staging,
    x0: &Trajectory,
    u0: &Trajectory,
    v0: &Trajectory,
) -> Result<i32, CliError> {
    let log_path = staging.tmp("iterations.csv");
    let mut log = BufWriter::new(File::create(&log_path).map_err(|e| io_failure(&log_path, e))?);
    let mut log_err = writeln!(log, "{ITERATION_CSV_HEADER}").err();
    let report = alm::solve_with_observer(problem, &cfg.alm, x0, u0, v0, |rec, _| {
        if log_err.is_none() {
            log_err = writeln!(log, "{}", rec.csv_row()).and_then(|_| log.flush()).err();
        }
    })
    .map_err(|e| CliError::from_error(&e))?;
    if let Some(e) = log_err {
        return Err(io_failure(&log_path, e));
    }
    drop(log);

    let summary = build_summary(problem, cfg, &report)?;
    staging.write("trajectory.csv", &final_trajectory_csv(problem, &report))?;
    staging.write("summary.json", &summary_json(&summary))?;
    staging.write("trajectory.svg", &trajectory_svg(problem, &report.x))?;
    staging.write("residuals.svg", &residuals_svg(&report.iterations))?;

    let last = report.final_record();
    println!(
        "{}: {} after {} outer iterations (stationarity {:.3e}, complementarity {:.3e}, rho {:.6})",
        problem.name(),
        report.status.as_str(),
        report.iterations.len(),
        last.residuals.stationarity_l1,
        last.residuals.complementarity_sup,
        last.rho
    );
    Ok(match report.status {
        SolveStatus::AkktConverged => EXIT_OK,
        SolveStatus::MaxOuterReached => EXIT_MAX_OUTER,
        SolveStatus::InnerFailure => EXIT_INNER_FAILURE,
    })
}

fn build_summary(problem: &ProblemDefinition, cfg: &RunConfig, report: &SolveReport) -> Result<RunSummary, CliError> {
    let last = report.final_record();
    let error_metrics = if problem.has_reference() {
        Some(solution_error(problem, &report.x).map_err(|e| CliError::from_error(&e))?)
    } else {
        None
    };
    Ok(RunSummary {
        problem: problem.name().to_string(),
        nodes: report.grid.node_count(),
        horizon: report.grid.horizon(),
        status: report.status,
        outer_iterations: report.iterations.len(),
        final_rho: last.rho,
        residuals: last.residuals,
        objective: last.objective,
        infeas_measure: last.infeas_measure,
        max_violation: max_violation(problem, &report.grid, &report.x).map_err(|e| CliError::from_error(&e))?,
        certificates: report.certificates.clone(),
        error_metrics,
        config: cfg.alm.clone(),
    })
}

pub fn summary_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary values are finite");
    s.push('\n');
    s
}

fn final_trajectory_csv(problem: &ProblemDefinition, report: &SolveReport) -> String {
    let mut out = String::from("t");
    for (prefix, count) in [("x", problem.n()), ("u", problem.p()), ("v", problem.m())] {
        for i in 1..=count {
            out.push_str(&format!(",{prefix}{i}"));
        }
    }
    out.push('\n');
    for (i, &t) in report.grid.nodes().iter().enumerate() {
        out.push_str(&fmt_f64(t));
        for v in report.x.row(i).iter().chain(report.u.row(i)).chain(report.v.row(i)) {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

fn trajectory_svg(problem: &ProblemDefinition, x: &Trajectory) -> String {
    let series: Vec<Series> = (0..x.dim())
        .map(|d| Series {
            label: format!("x{}", d + 1),
            points: x.grid().nodes().iter().zip(x.rows()).map(|(&t, r)| (t, r[d])).collect(),
        })
        .collect();
    line_chart(&format!("{}: final trajectory", problem.name()), "t", "x(t)", &series, false)
}

fn residuals_svg(records: &[IterationRecord]) -> String {
    let curve = |label: &str, f: fn(&IterationRecord) -> f64| Series {
        label: label.to_string(),
        points: records.iter().map(|r| (r.k as f64, f(r))).collect(),
    };
    let series = vec![
        curve("stationarity", |r| r.residuals.stationarity_l1),
        curve("complementarity", |r| r.residuals.complementarity_sup),
        curve("infeasibility", |r| r.infeas_measure),
    ];
    line_chart("AKKT residuals", "outer iteration k", "residual", &series, true)
}

fn cmd_check(args: &CheckArgs) -> Result<i32, CliError> {
    let report = check_report(args)?;
    print!("{}", summary_json(&report));
    Ok(if report.akkt_satisfied { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn check_report(args: &CheckArgs) -> Result<CheckReport, CliError> {
    if args.eps.is_nan() || args.eps <= 0.0 {
        return Err(usage(format!("--eps must be positive, got {}", args.eps)));
    }
    let problem = builtin(&args.problem).map_err(|e| CliError::from_error(&e))?;
    let (n, p, m) = (problem.n(), problem.p(), problem.m());
    let data = |e: Error| CliError::from_error(&e);
    let traj = Trajectory::load_csv(&args.trajectory).map_err(data)?;
    let grid = traj.grid().clone();
    if (grid.horizon() - problem.horizon()).abs() > 1e-9 * problem.horizon() {
        return Err(CliError::new(
            EXIT_DATA,
            format!(
                "{} ends at t = {}, problem `{}` has horizon {}",
                args.trajectory.display(),
                grid.horizon(),
                problem.name(),
                problem.horizon()
            ),
        ));
    }
    let grid = problem.grid(grid.node_count()).map_err(data)?;
    let columns = |traj: &Trajectory, from: usize, count: usize| {
        let values = traj.rows().flat_map(|r| r[from..from + count].to_vec()).collect();
        Trajectory::new(grid.clone(), count, values)
    };

    let (x, mult, mult_offset) = match &args.multipliers {
        Some(path) => {
            if traj.dim() != n {
                return Err(CliError::new(
                    EXIT_DATA,
                    format!("--trajectory has {} state columns but `{}` needs n = {n}", traj.dim(), problem.name()),
                ));
            }
            let mult = Trajectory::load_csv(path).map_err(data)?;
            if mult.dim() != p + m {
                return Err(CliError::new(
                    EXIT_DATA,
                    format!(
                        "--multipliers has {} columns but `{}` needs p + m = {}",
                        mult.dim(),
                        problem.name(),
                        p + m
                    ),
                ));
            }
            if !same_grid(mult.grid(), &grid) {
                return Err(CliError::new(EXIT_DATA, "--multipliers is on a different time grid than --trajectory"));
            }
            (columns(&traj, 0, n).map_err(data)?, mult, 0)
        }
        None => {
            if traj.dim() != n + p + m {
                return Err(CliError::new(
                    EXIT_DATA,
                    format!(
                        "--trajectory has {} columns; `{}` needs n = {n} state columns plus p + m = {} multiplier columns, or a separate --multipliers file",
                        traj.dim(),
                        problem.name(),
                        p + m
                    ),
                ));
            }
            (columns(&traj, 0, n).map_err(data)?, traj, n)
        }
    };
    let u = columns(&mult, mult_offset, p).map_err(data)?;
    let v = columns(&mult, mult_offset + p, m).map_err(data)?;
    if v.values().iter().any(|&vj| vj < 0.0) {
        return Err(CliError::new(EXIT_DATA, "inequality multipliers must be nonnegative"));
    }

    let eval = |e: Error| CliError::from_error(&e);
    let residuals = akkt_residuals(&problem, &grid, &x, &u, &v).map_err(eval)?;
    let tol = Tolerances::default();
    let certificates = Certificates {
        akkt: akkt_certificate(&residuals, args.eps),
        sufficiency: sufficiency_certificate(&problem, &grid, &x, &u, &v, tol.hypothesis).map_err(eval)?,
        infeasibility: infeasibility_report(&problem, &grid, &x, tol.feasibility, tol.stationarity).map_err(eval)?,
    };
    Ok(CheckReport {
        problem: problem.name().to_string(),
        nodes: grid.node_count(),
        eps: args.eps,
        akkt_satisfied: certificates.akkt.is_some(),
        residuals,
        max_violation: max_violation(&problem, &grid, &x).map_err(eval)?,
        theta: feasibility_factor(&problem, &grid, &x).map_err(eval)?,
        theta_stationarity: feasibility_stationarity_residual(&problem, &grid, &x).map_err(eval)?,
        certificates,
    })
}

/// One row per built-in problem, e.g. `ex3  n=3 p=1 m=2 T=1 ref=yes`.
pub fn list_table() -> String {
    let mut out = String::new();
    for name in BUILTIN_NAMES {
        let p = builtin(name).expect("registered names resolve");
        out.push_str(&format!(
            "{name}  n={} p={} m={} T={} ref={}\n",
            p.n(),
            p.p(),
            p.m(),
            p.horizon(),
            if p.has_reference() { "yes" } else { "no" }
        ));
    }
    out
}
