//! Approximate solution of the augmented Lagrangian subproblem.
//!
//! On a grid the integral objective `∫ L_ρ(x(t), ũ(t), ṽ(t), t) dt`
//! separates into one `n`-dimensional problem per node, since `φ`, `h` and
//! `g` only see `x(t)` at the same `t`. Each node is minimized by gradient
//! descent with a Barzilai–Borwein step proposal and Armijo backtracking.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagrangian::{AugLagNode, MultiplierSet};
use crate::problem::ProblemDefinition;
use crate::timegrid::{TimeGrid, Trajectory};

const STEP_MAX: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerConfig {
    /// Target for `‖∇ₓL_ρ‖∞` at each node.
    pub grad_tol: f64,
    pub max_iters: usize,
    pub armijo_c: f64,
    pub step_init: f64,
    pub step_min: f64,
    /// Iterates with `‖x‖∞` beyond this are declared divergent.
    pub iterate_box: f64,
}

impl Default for InnerConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-6,
            max_iters: 500,
            armijo_c: 1e-4,
            step_init: 1.0,
            step_min: 1e-14,
            iterate_box: 1e6,
        }
    }
}

impl InnerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grad_tol", self.grad_tol),
            ("armijo_c", self.armijo_c),
            ("step_init", self.step_init),
            ("step_min", self.step_min),
            ("iterate_box", self.iterate_box),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(format!("inner {name} must be positive, got {v}")));
            }
        }
        if self.armijo_c >= 1.0 {
            return Err(Error::invalid("inner armijo_c must be below 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("inner max_iters must be positive"));
        }
        Ok(())
    }
}

/// Ordered by severity: `Converged < MaxIters < Diverged`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeStatus {
    Converged,
    MaxIters,
    Diverged,
}

impl NodeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeStatus::Converged => "Converged",
            NodeStatus::MaxIters => "MaxIters",
            NodeStatus::Diverged => "Diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult {
    pub x_star: Vec<f64>,
    pub grad_inf_norm: f64,
    /// Accepted steps.
    pub iterations: usize,
    pub status: NodeStatus,
}

/// One accepted line-search step, reported to the observer of
/// [`solve_node_traced`].
#[derive(Debug, Clone)]
pub struct AcceptedStep<'a> {
    pub x: &'a [f64],
    pub direction: &'a [f64],
    pub alpha: f64,
    pub f_old: f64,
    pub f_new: f64,
    /// Directional derivative `∇ψ(x)ᵀd`.
    pub slope: f64,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn solve_node(
    problem: &ProblemDefinition,
    t: f64,
    x_init: &[f64],
    safeguarded: &MultiplierSet,
    rho: f64,
    cfg: &InnerConfig,
) -> Result<InnerResult> {
    solve_node_traced(problem, t, x_init, safeguarded, rho, cfg, |_| {})
}

/// [`solve_node`] with a callback on every accepted step.
pub fn solve_node_traced<F>(
    problem: &ProblemDefinition,
    t: f64,
    x_init: &[f64],
    safeguarded: &MultiplierSet,
    rho: f64,
    cfg: &InnerConfig,
    mut observe: F,
) -> Result<InnerResult>
where
    F: FnMut(&AcceptedStep<'_>),
{
    cfg.validate()?;
    if x_init.len() != problem.n() {
        return Err(Error::invalid(format!(
            "x_init has {} components, expected {}",
            x_init.len(),
            problem.n()
        )));
    }
    let mut node = AugLagNode::new(problem, t, safeguarded.u(), safeguarded.v(), rho)?;
    let n = node.dim();

    let mut x = x_init.to_vec();
    let mut grad = vec![0.0; n];
    let mut f = node.value_and_gradient(&x, &mut grad)?;

    let mut x_new = vec![0.0; n];
    let mut grad_new = vec![0.0; n];
    let mut direction = vec![0.0; n];

    let mut best_x = x.clone();
    let mut best_norm = inf_norm(&grad);
    let mut alpha = cfg.step_init;
    let mut iterations = 0;

    let finish = |x: Vec<f64>, norm: f64, iterations: usize, status: NodeStatus| InnerResult {
        x_star: x,
        grad_inf_norm: norm,
        iterations,
        status,
    };

    loop {
        let gnorm = inf_norm(&grad);
        if gnorm <= cfg.grad_tol {
            return Ok(finish(x, gnorm, iterations, NodeStatus::Converged));
        }
        if iterations >= cfg.max_iters {
            return Ok(finish(best_x, best_norm, iterations, NodeStatus::MaxIters));
        }

        for (d, g) in direction.iter_mut().zip(&grad) {
            *d = -g;
        }
        let slope = dot(&grad, &direction);

        // backtrack from the spectral step until sufficient decrease
        let mut step = alpha.clamp(cfg.step_min, STEP_MAX);
        let f_new = loop {
            for ((xn, xi), d) in x_new.iter_mut().zip(&x).zip(&direction) {
                *xn = xi + step * d;
            }
            if let Ok(value) = node.value_and_gradient(&x_new, &mut grad_new) {
                if value <= f + cfg.armijo_c * step * slope {
                    break value;
                }
            }
            step *= 0.5;
            if step < cfg.step_min {
                return Ok(finish(best_x, best_norm, iterations, NodeStatus::MaxIters));
            }
        };

        observe(&AcceptedStep {
            x: &x,
            direction: &direction,
            alpha: step,
            f_old: f,
            f_new,
            slope,
        });
        iterations += 1;

        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..n {
            let s = x_new[i] - x[i];
            let y = grad_new[i] - grad[i];
            ss += s * s;
            sy += s * y;
        }
        alpha = if sy > 0.0 { ss / sy } else { 2.0 * step };

        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut grad, &mut grad_new);
        f = f_new;

        if inf_norm(&x) > cfg.iterate_box {
            return Ok(finish(best_x, best_norm, iterations, NodeStatus::Diverged));
        }
        let gnorm = inf_norm(&grad);
        if gnorm < best_norm {
            best_norm = gnorm;
            best_x.copy_from_slice(&x);
        }
    }
}

/// Outcome of one full subproblem solve.
#[derive(Debug, Clone)]
pub struct SubproblemResult {
    pub x: Trajectory,
    pub nodes: Vec<InnerResult>,
    /// Most severe node status.
    pub worst_status: NodeStatus,
    pub max_grad_norm: f64,
}

impl SubproblemResult {
    pub fn total_iterations(&self) -> usize {
        self.nodes.iter().map(|r| r.iterations).sum()
    }
}

/// Solves every node independently, warm-started from `x_warm`.
///
/// Node solves run on the current rayon pool; each writes only its own row,
/// so the result does not depend on scheduling.
pub fn solve_subproblem(
    problem: &ProblemDefinition,
    grid: &TimeGrid,
    x_warm: &Trajectory,
    u_tilde: &Trajectory,
    v_tilde: &Trajectory,
    rho: f64,
    cfg: &InnerConfig,
) -> Result<SubproblemResult> {
    for (what, traj, dim) in [
        ("x_warm", x_warm, problem.n()),
        ("u_tilde", u_tilde, problem.p()),
        ("v_tilde", v_tilde, problem.m()),
    ] {
        if traj.grid() != grid || traj.dim() != dim {
            return Err(Error::invalid(format!(
                "{what} must have {dim} components on the subproblem grid"
            )));
        }
    }

    let nodes: Vec<InnerResult> = grid
        .nodes()
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let mult = MultiplierSet::new(u_tilde.row(i).to_vec(), v_tilde.row(i).to_vec())?;
            solve_node(problem, t, x_warm.row(i), &mult, rho, cfg)
        })
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(grid.node_count() * problem.n());
    let mut worst_status = NodeStatus::Converged;
    let mut max_grad_norm: f64 = 0.0;
    for r in &nodes {
        values.extend_from_slice(&r.x_star);
        worst_status = worst_status.max(r.status);
        max_grad_norm = max_grad_norm.max(r.grad_inf_norm);
    }
    Ok(SubproblemResult {
        x: Trajectory::new(grid.clone(), problem.n(), values)?,
        nodes,
        worst_status,
        max_grad_norm,
    })
}
