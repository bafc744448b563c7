//! The outer safeguarded augmented Lagrangian loop.
//!
//! Each outer iteration `k`:
//!
//! 1. solves the node-wise subproblem for `x^k` at `(ũ^k, ṽ^k, ρ_k)`,
//!    warm-started from `x^{k-1}`;
//! 2. forms `u^k = ũ^k + ρ_k h(x^k)` and `v^k = max(ṽ^k + ρ_k g(x^k), 0)`;
//! 3. stops if the AKKT residuals of `(x^k, u^k, v^k)` are below `δ_k`;
//! 4. keeps `ρ` if `max(‖H^k‖∞, ‖V^k‖∞) ≤ τ max(‖H^{k-1}‖∞, ‖V^{k-1}‖∞)`,
//!    otherwise multiplies it by `γ`, where `H^k = h(x^k)` and
//!    `V^k = max(g(x^k), -ṽ^k/ρ_k)`;
//! 5. projects `u^k` into `[-M, M]` and `v^k` into `[0, N]` to get the
//!    next safeguarded multipliers.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    akkt_certificate, infeasibility_report, sufficiency_certificate, Certificate, Tolerances,
};
use crate::error::{Error, Result};
use crate::inner::{solve_subproblem, InnerConfig, NodeStatus};
use crate::lagrangian::{
    akkt_residuals, objective_quadrature, updated_equality, updated_inequality, Residuals,
};
use crate::problem::{EvalBundle, ProblemDefinition};
use crate::timegrid::{sup_node_norm, TimeGrid, Trajectory};

/// Consecutive outer iterations with a divergent node before giving up.
pub const DIVERGENCE_PATIENCE: usize = 50;

/// Stopping tolerance `δ_k` per outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsSchedule {
    /// `δ_k = eps_stop` for all `k`.
    #[default]
    Constant,
    /// `δ_k = max(eps_stop, start · ratio^(k-1))`.
    Geometric { start: f64, ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlmConfig {
    pub rho_init: f64,
    pub gamma: f64,
    pub tau: f64,
    /// Box for the equality multipliers, `[-M, M]`.
    pub bound_m: f64,
    /// Box for the inequality multipliers, `[0, N]`.
    pub bound_n: f64,
    pub eps_stop: f64,
    pub eps_schedule: EpsSchedule,
    pub max_outer: usize,
    pub inner: InnerConfig,
    /// Worker threads for node solves; 0 picks the rayon default.
    pub threads: usize,
}

impl Default for AlmConfig {
    fn default() -> Self {
        Self::with_eps(1e-5)
    }
}

impl AlmConfig {
    /// Defaults with stopping tolerance `eps`; the inner gradient tolerance
    /// is set one order tighter, floored at `1e-8`.
    pub fn with_eps(eps: f64) -> Self {
        Self {
            rho_init: 1.0,
            gamma: 1.001,
            tau: 1e-3,
            bound_m: 1e50,
            bound_n: 1e50,
            eps_stop: eps,
            eps_schedule: EpsSchedule::Constant,
            max_outer: 1000,
            inner: InnerConfig {
                grad_tol: inner_tol_for(eps),
                ..InnerConfig::default()
            },
            threads: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: String| if ok { Ok(()) } else { Err(Error::invalid(msg)) };
        check(
            self.rho_init > 0.0 && self.rho_init.is_finite(),
            format!("rho_init must be positive, got {}", self.rho_init),
        )?;
        check(
            self.gamma > 1.0 && self.gamma.is_finite(),
            format!("gamma must exceed 1, got {}", self.gamma),
        )?;
        check(
            self.tau > 0.0 && self.tau < 1.0,
            format!("tau must lie in (0, 1), got {}", self.tau),
        )?;
        check(
            self.bound_m > 0.0 && self.bound_n > 0.0,
            format!(
                "safeguard bounds must be positive, got M = {}, N = {}",
                self.bound_m, self.bound_n
            ),
        )?;
        check(
            self.eps_stop > 0.0,
            format!("eps_stop must be positive, got {}", self.eps_stop),
        )?;
        check(self.max_outer >= 1, "max_outer must be at least 1".into())?;
        if let EpsSchedule::Geometric { start, ratio } = self.eps_schedule {
            check(
                start > 0.0 && ratio > 0.0 && ratio < 1.0,
                format!("geometric schedule needs start > 0 and ratio in (0, 1), got {start}, {ratio}"),
            )?;
        }
        self.inner.validate()
    }

    pub fn delta(&self, k: usize) -> f64 {
        match self.eps_schedule {
            EpsSchedule::Constant => self.eps_stop,
            EpsSchedule::Geometric { start, ratio } => {
                let exp = i32::try_from(k.saturating_sub(1)).unwrap_or(i32::MAX);
                (start * ratio.powi(exp)).max(self.eps_stop)
            }
        }
    }
}

pub fn inner_tol_for(eps: f64) -> f64 {
    (eps / 10.0).max(1e-8)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    AkktConverged,
    MaxOuterReached,
    InnerFailure,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::AkktConverged => "AkktConverged",
            SolveStatus::MaxOuterReached => "MaxOuterReached",
            SolveStatus::InnerFailure => "InnerFailure",
        }
    }
}

/// One row of the iteration log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// Penalty used for this iteration's subproblem.
    pub rho: f64,
    pub residuals: Residuals,
    /// `max(‖H^k‖∞, ‖V^k‖∞)`.
    pub infeas_measure: f64,
    pub objective: f64,
    pub inner_status: NodeStatus,
    pub inner_max_grad: f64,
    pub inner_iterations: usize,
    /// Whether the infeasibility-progress test kept `ρ`.
    pub progress_test_passed: bool,
}

pub const ITERATION_CSV_HEADER: &str =
    "k,rho,stationarity_l1,complementarity_sup,infeas_measure,objective,inner_status,inner_max_grad";

impl IterationRecord {
    pub fn csv_row(&self) -> String {
        use crate::timegrid::fmt_f64;
        format!(
            "{},{},{},{},{},{},{},{}",
            self.k,
            fmt_f64(self.rho),
            fmt_f64(self.residuals.stationarity_l1),
            fmt_f64(self.residuals.complementarity_sup),
            fmt_f64(self.infeas_measure),
            fmt_f64(self.objective),
            self.inner_status.as_str(),
            fmt_f64(self.inner_max_grad),
        )
    }
}

/// The evolving iterate, exposed to observers after every outer iteration.
#[derive(Debug, Clone)]
pub struct AlmState {
    pub k: usize,
    pub rho: f64,
    pub x: Trajectory,
    pub u_tilde: Trajectory,
    pub v_tilde: Trajectory,
    pub u: Trajectory,
    pub v: Trajectory,
    pub h_measure: Trajectory,
    pub v_measure: Trajectory,
    pub infeas_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub akkt: Option<Certificate>,
    pub sufficiency: Certificate,
    pub infeasibility: Option<Certificate>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: Vec<IterationRecord>,
    pub grid: TimeGrid,
    pub x: Trajectory,
    pub u: Trajectory,
    pub v: Trajectory,
    pub certificates: Certificates,
}

impl SolveReport {
    pub fn final_record(&self) -> &IterationRecord {
        self.iterations.last().expect("at least one outer iteration")
    }
}

/// Step-4 formulas at every node: `u = ũ + ρh`, `v = max(ṽ + ρg, 0)`.
pub fn multiplier_update(
    bundles: &[EvalBundle],
    u_tilde: &Trajectory,
    v_tilde: &Trajectory,
    rho: f64,
) -> Result<(Trajectory, Trajectory)> {
    if bundles.len() != u_tilde.node_count() || bundles.len() != v_tilde.node_count() {
        return Err(Error::invalid("one evaluation bundle per node is required"));
    }
    let mut u = u_tilde.clone();
    let mut v = v_tilde.clone();
    for (i, b) in bundles.iter().enumerate() {
        for (ui, &h) in u.row_mut(i).iter_mut().zip(&b.h) {
            *ui = updated_equality(*ui, rho, h);
        }
        for (vj, &g) in v.row_mut(i).iter_mut().zip(&b.g) {
            *vj = updated_inequality(*vj, rho, g);
        }
    }
    Ok((u, v))
}

/// Clamps `u` into `[-M, M]` and `v` into `[0, N]` componentwise.
pub fn safeguard_project(
    u: &Trajectory,
    v: &Trajectory,
    bound_m: f64,
    bound_n: f64,
) -> (Trajectory, Trajectory) {
    let clamp = |traj: &Trajectory, lo: f64, hi: f64| {
        let values = traj.values().iter().map(|x| x.clamp(lo, hi)).collect();
        Trajectory::new(traj.grid().clone(), traj.dim(), values).expect("clamped values stay finite")
    };
    (clamp(u, -bound_m, bound_m), clamp(v, 0.0, bound_n))
}

pub fn infeasibility_measure(h_measure: &Trajectory, v_measure: &Trajectory) -> f64 {
    sup_node_norm(h_measure).max(sup_node_norm(v_measure))
}

/// Returns the next penalty and the current measure
/// `max(‖H‖∞, ‖V‖∞)`. Ties keep `ρ`.
pub fn penalty_update(
    rho: f64,
    prev_infeas: f64,
    h_measure: &Trajectory,
    v_measure: &Trajectory,
    cfg: &AlmConfig,
) -> (f64, f64) {
    let current = infeasibility_measure(h_measure, v_measure);
    let next = if current <= cfg.tau * prev_infeas {
        rho
    } else {
        cfg.gamma * rho
    };
    (next, current)
}

fn evaluate_nodes(problem: &ProblemDefinition, x: &Trajectory) -> Result<Vec<EvalBundle>> {
    x.grid()
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &t)| problem.evaluate_all(x.row(i), t))
        .collect()
}

/// `H = h(x)` and `V = max(g(x), floor)` where `floor` is `-ṽ/ρ` during the
/// iteration and `0` for the initial point.
fn infeasibility_measures(
    bundles: &[EvalBundle],
    grid: &TimeGrid,
    p: usize,
    m: usize,
    floor: impl Fn(usize, usize) -> f64,
) -> Result<(Trajectory, Trajectory)> {
    let mut h = Vec::with_capacity(bundles.len() * p);
    let mut v = Vec::with_capacity(bundles.len() * m);
    for (i, b) in bundles.iter().enumerate() {
        h.extend_from_slice(&b.h);
        v.extend(b.g.iter().enumerate().map(|(j, &g)| g.max(floor(i, j))));
    }
    Ok((
        Trajectory::new(grid.clone(), p, h)?,
        Trajectory::new(grid.clone(), m, v)?,
    ))
}

pub fn solve(
    problem: &ProblemDefinition,
    cfg: &AlmConfig,
    x0: &Trajectory,
    u_tilde1: &Trajectory,
    v_tilde1: &Trajectory,
) -> Result<SolveReport> {
    solve_with_observer(problem, cfg, x0, u_tilde1, v_tilde1, |_, _| {})
}

/// [`solve`] that hands every iteration record and state to `observe`
/// as soon as it is produced.
pub fn solve_with_observer<F>(
    problem: &ProblemDefinition,
    cfg: &AlmConfig,
    x0: &Trajectory,
    u_tilde1: &Trajectory,
    v_tilde1: &Trajectory,
    mut observe: F,
) -> Result<SolveReport>
where
    F: FnMut(&IterationRecord, &AlmState),
{
    cfg.validate()?;
    let grid = x0.grid().clone();
    if (grid.horizon() - problem.horizon()).abs() > 1e-12 * problem.horizon() {
        return Err(Error::invalid(format!(
            "grid horizon {} differs from the problem horizon {}",
            grid.horizon(),
            problem.horizon()
        )));
    }
    for (what, traj, dim) in [
        ("x0", x0, problem.n()),
        ("u0", u_tilde1, problem.p()),
        ("v0", v_tilde1, problem.m()),
    ] {
        if traj.grid() != &grid || traj.dim() != dim {
            return Err(Error::invalid(format!(
                "{what} must have {dim} components on the solve grid"
            )));
        }
    }
    if u_tilde1.values().iter().any(|u| u.abs() > cfg.bound_m) {
        return Err(Error::invalid(format!(
            "initial equality multipliers must lie in [-{0}, {0}]",
            cfg.bound_m
        )));
    }
    if v_tilde1
        .values()
        .iter()
        .any(|v| !(0.0..=cfg.bound_n).contains(v))
    {
        return Err(Error::invalid(format!(
            "initial inequality multipliers must lie in [0, {}]",
            cfg.bound_n
        )));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    run(problem, cfg, &pool, &grid, x0, u_tilde1, v_tilde1, &mut observe)
}

#[allow(clippy::too_many_arguments)]
fn run<F>(
    problem: &ProblemDefinition,
    cfg: &AlmConfig,
    pool: &rayon::ThreadPool,
    grid: &TimeGrid,
    x0: &Trajectory,
    u_tilde1: &Trajectory,
    v_tilde1: &Trajectory,
    observe: &mut F,
) -> Result<SolveReport>
where
    F: FnMut(&IterationRecord, &AlmState),
{
    let (p, m) = (problem.p(), problem.m());
    let baseline = evaluate_nodes(problem, x0)?;
    let (h0, v0) = infeasibility_measures(&baseline, grid, p, m, |_, _| 0.0)?;
    let mut prev_infeas = infeasibility_measure(&h0, &v0);

    let mut x = x0.clone();
    let mut u_tilde = u_tilde1.clone();
    let mut v_tilde = v_tilde1.clone();
    let mut rho = cfg.rho_init;
    let mut divergent_streak = 0;
    let mut records = Vec::new();

    let (status, u, v) = loop {
        let k = records.len() + 1;
        let sub = pool.install(|| solve_subproblem(problem, grid, &x, &u_tilde, &v_tilde, rho, &cfg.inner))?;
        x = sub.x;

        let bundles = evaluate_nodes(problem, &x)?;
        let (u, v) = multiplier_update(&bundles, &u_tilde, &v_tilde, rho)?;
        let residuals = akkt_residuals(problem, grid, &x, &u, &v)?;

        let (h_measure, v_measure) =
            infeasibility_measures(&bundles, grid, p, m, |i, j| -v_tilde.row(i)[j] / rho)?;
        let (rho_candidate, infeas) = penalty_update(rho, prev_infeas, &h_measure, &v_measure, cfg);
        let progress_test_passed = rho_candidate == rho;

        let diverged = sub.worst_status == NodeStatus::Diverged;
        divergent_streak = if diverged { divergent_streak + 1 } else { 0 };
        // divergence is answered with penalty growth regardless of the test
        let rho_next = if diverged { cfg.gamma * rho } else { rho_candidate };

        let record = IterationRecord {
            k,
            rho,
            residuals,
            infeas_measure: infeas,
            objective: objective_quadrature(problem, grid, &x)?,
            inner_status: sub.worst_status,
            inner_max_grad: sub.max_grad_norm,
            inner_iterations: sub.nodes.iter().map(|r| r.iterations).sum(),
            progress_test_passed,
        };

        let delta = cfg.delta(k);
        let converged =
            residuals.stationarity_l1 <= delta && residuals.complementarity_sup <= delta;

        let (u_next, v_next) = safeguard_project(&u, &v, cfg.bound_m, cfg.bound_n);
        let state = AlmState {
            k,
            rho,
            x: x.clone(),
            u_tilde: u_tilde.clone(),
            v_tilde: v_tilde.clone(),
            u: u.clone(),
            v: v.clone(),
            h_measure,
            v_measure,
            infeas_measure: infeas,
        };
        observe(&record, &state);
        records.push(record);

        if converged {
            break (SolveStatus::AkktConverged, u, v);
        }
        if divergent_streak >= DIVERGENCE_PATIENCE {
            break (SolveStatus::InnerFailure, u, v);
        }
        if k >= cfg.max_outer {
            break (SolveStatus::MaxOuterReached, u, v);
        }

        u_tilde = u_next;
        v_tilde = v_next;
        prev_infeas = infeas;
        rho = rho_next;
    };

    let tol = Tolerances::default();
    let certificates = Certificates {
        akkt: akkt_certificate(&records.last().expect("one iteration").residuals, cfg.eps_stop),
        sufficiency: sufficiency_certificate(problem, grid, &x, &u, &v, tol.hypothesis)?,
        infeasibility: infeasibility_report(problem, grid, &x, tol.feasibility, tol.stationarity)?,
    };
    Ok(SolveReport {
        status,
        iterations: records,
        grid: grid.clone(),
        x,
        u,
        v,
        certificates,
    })
}
