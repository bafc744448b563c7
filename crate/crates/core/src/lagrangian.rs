//! Lagrangian and augmented Lagrangian evaluation, the feasibility factor,
//! and the asymptotic-KKT residuals.
//!
//! ```text
//! L(x, u, v, t)   = φ + Σᵢ uᵢ hᵢ + Σⱼ vⱼ gⱼ
//! L_ρ(x, ũ, ṽ, t) = φ + ρ/2 Σᵢ (hᵢ + ũᵢ/ρ)² + ρ/2 Σⱼ max(0, gⱼ + ṽⱼ/ρ)²
//! Θ(x)            = ∫ Σᵢ hᵢ² + Σⱼ max(0, gⱼ)² dt
//! ```
//!
//! `∇ₓL_ρ(x, ũ, ṽ)` equals `∇ₓL(x, u, v)` at the first-order updated
//! multipliers `u = ũ + ρh`, `v = max(ṽ + ρg, 0)`. Both gradients below
//! form those coefficients with the same floating-point operations, so the
//! identity holds bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{EvalBundle, ProblemDefinition};
use crate::timegrid::{l1_time_norm, TimeGrid, Trajectory};

/// Equality (`u`) and inequality (`v ≥ 0`) multipliers at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSet {
    u: Vec<f64>,
    v: Vec<f64>,
}

impl MultiplierSet {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if let Some(j) = v.iter().position(|&vj| vj.is_nan() || vj < 0.0) {
            return Err(Error::invalid(format!(
                "inequality multiplier v[{j}] = {} must be nonnegative",
                v[j]
            )));
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::invalid("multipliers must be finite"));
        }
        Ok(Self { u, v })
    }

    pub fn zeros(p: usize, m: usize) -> Self {
        Self {
            u: vec![0.0; p],
            v: vec![0.0; m],
        }
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }
}

/// The three pointwise-AKKT residuals on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Discrete `∫ ‖∇ₓL(t)‖₁ dt`, the dual norm of the gradient pairing over
    /// test directions with `‖γ‖∞ ≤ 1`.
    pub stationarity_l1: f64,
    /// `max_{i,j} vⱼ(tᵢ) · max(-gⱼ(x(tᵢ), tᵢ), 0)`.
    pub complementarity_sup: f64,
    /// Smallest inequality multiplier; `None` when there are no inequalities.
    pub multiplier_min: Option<f64>,
}

fn check_dims(problem: &ProblemDefinition, x: &[f64], u: &[f64], v: &[f64]) -> Result<()> {
    if x.len() != problem.n() || u.len() != problem.p() || v.len() != problem.m() {
        return Err(Error::invalid(format!(
            "dimension mismatch for `{}`: x {} (n = {}), u {} (p = {}), v {} (m = {})",
            problem.name(),
            x.len(),
            problem.n(),
            u.len(),
            problem.p(),
            v.len(),
            problem.m()
        )));
    }
    Ok(())
}

/// `out = ∇φ + Σᵢ uᵢ∇hᵢ + Σⱼ vⱼ∇gⱼ` from an evaluated bundle.
fn combine_gradient(b: &EvalBundle, u: &[f64], v: &[f64], out: &mut [f64]) {
    let n = out.len();
    out.copy_from_slice(&b.grad_phi);
    for (i, &ui) in u.iter().enumerate() {
        for (o, d) in out.iter_mut().zip(&b.jac_h[i * n..(i + 1) * n]) {
            *o += ui * d;
        }
    }
    for (j, &vj) in v.iter().enumerate() {
        for (o, d) in out.iter_mut().zip(&b.jac_g[j * n..(j + 1) * n]) {
            *o += vj * d;
        }
    }
}

#[inline]
pub(crate) fn updated_equality(u_tilde: f64, rho: f64, h: f64) -> f64 {
    u_tilde + rho * h
}

#[inline]
pub(crate) fn updated_inequality(v_tilde: f64, rho: f64, g: f64) -> f64 {
    (v_tilde + rho * g).max(0.0)
}

pub fn lagrangian_gradient(
    problem: &ProblemDefinition,
    x: &[f64],
    mult: &MultiplierSet,
    t: f64,
) -> Result<Vec<f64>> {
    check_dims(problem, x, mult.u(), mult.v())?;
    let b = problem.evaluate_all(x, t)?;
    let mut out = vec![0.0; problem.n()];
    combine_gradient(&b, mult.u(), mult.v(), &mut out);
    Ok(out)
}

/// Evaluates `L_ρ(·, ũ, ṽ, t)` and its gradient at a fixed node, reusing
/// scratch buffers across calls. This is the objective of one node
/// subproblem.
pub struct AugLagNode<'a> {
    problem: &'a ProblemDefinition,
    t: f64,
    u_tilde: &'a [f64],
    v_tilde: &'a [f64],
    rho: f64,
    bundle: EvalBundle,
    u_next: Vec<f64>,
    v_next: Vec<f64>,
}

impl<'a> AugLagNode<'a> {
    pub fn new(
        problem: &'a ProblemDefinition,
        t: f64,
        u_tilde: &'a [f64],
        v_tilde: &'a [f64],
        rho: f64,
    ) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::invalid(format!("penalty must be positive, got {rho}")));
        }
        if u_tilde.len() != problem.p() || v_tilde.len() != problem.m() {
            return Err(Error::invalid(format!(
                "multiplier dimensions ({}, {}) do not match (p, m) = ({}, {})",
                u_tilde.len(),
                v_tilde.len(),
                problem.p(),
                problem.m()
            )));
        }
        Ok(Self {
            problem,
            t,
            u_tilde,
            v_tilde,
            rho,
            bundle: EvalBundle::zeros(problem.n(), problem.p(), problem.m()),
            u_next: vec![0.0; problem.p()],
            v_next: vec![0.0; problem.m()],
        })
    }

    pub fn dim(&self) -> usize {
        self.problem.n()
    }

    pub fn value(&mut self, x: &[f64]) -> Result<f64> {
        self.problem.evaluate_into(x, self.t, &mut self.bundle)?;
        Ok(self.value_from_bundle())
    }

    /// Value and gradient in one evaluation pass.
    pub fn value_and_gradient(&mut self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.problem.evaluate_into(x, self.t, &mut self.bundle)?;
        let rho = self.rho;
        for ((u, &ut), &h) in self.u_next.iter_mut().zip(self.u_tilde).zip(&self.bundle.h) {
            *u = updated_equality(ut, rho, h);
        }
        for ((v, &vt), &g) in self.v_next.iter_mut().zip(self.v_tilde).zip(&self.bundle.g) {
            *v = updated_inequality(vt, rho, g);
        }
        combine_gradient(&self.bundle, &self.u_next, &self.v_next, grad);
        let value = self.value_from_bundle();
        if !value.is_finite() || grad.iter().any(|d| !d.is_finite()) {
            return Err(Error::Evaluation {
                what: "augmented Lagrangian",
                t: self.t,
                x: x.to_vec(),
            });
        }
        Ok(value)
    }

    fn value_from_bundle(&self) -> f64 {
        let rho = self.rho;
        let b = &self.bundle;
        let mut eq = 0.0;
        for (&h, &ut) in b.h.iter().zip(self.u_tilde) {
            eq += (h + ut / rho).powi(2);
        }
        let mut ineq = 0.0;
        for (&g, &vt) in b.g.iter().zip(self.v_tilde) {
            ineq += (g + vt / rho).max(0.0).powi(2);
        }
        b.phi + 0.5 * rho * eq + 0.5 * rho * ineq
    }
}

pub fn aug_lagrangian_value(
    problem: &ProblemDefinition,
    x: &[f64],
    safeguarded: &MultiplierSet,
    rho: f64,
    t: f64,
) -> Result<f64> {
    check_dims(problem, x, safeguarded.u(), safeguarded.v())?;
    AugLagNode::new(problem, t, safeguarded.u(), safeguarded.v(), rho)?.value(x)
}

pub fn aug_lagrangian_gradient(
    problem: &ProblemDefinition,
    x: &[f64],
    safeguarded: &MultiplierSet,
    rho: f64,
    t: f64,
) -> Result<Vec<f64>> {
    check_dims(problem, x, safeguarded.u(), safeguarded.v())?;
    let mut node = AugLagNode::new(problem, t, safeguarded.u(), safeguarded.v(), rho)?;
    let mut grad = vec![0.0; problem.n()];
    node.value_and_gradient(x, &mut grad)?;
    Ok(grad)
}

fn check_on_grid(grid: &TimeGrid, trajs: &[(&str, &Trajectory, usize)]) -> Result<()> {
    for (what, traj, dim) in trajs {
        if traj.grid() != grid {
            return Err(Error::invalid(format!("{what} is not sampled on the given grid")));
        }
        if traj.dim() != *dim {
            return Err(Error::invalid(format!(
                "{what} has {} components, expected {dim}",
                traj.dim()
            )));
        }
    }
    Ok(())
}

pub fn akkt_residuals(
    problem: &ProblemDefinition,
    grid: &TimeGrid,
    x: &Trajectory,
    u: &Trajectory,
    v: &Trajectory,
) -> Result<Residuals> {
    check_on_grid(
        grid,
        &[
            ("x", x, problem.n()),
            ("u", u, problem.p()),
            ("v", v, problem.m()),
        ],
    )?;
    if let Some(pos) = v.values().iter().position(|&vj| vj < 0.0) {
        return Err(Error::invalid(format!(
            "negative inequality multiplier at node {}, index {}",
            pos / problem.m(),
            pos % problem.m()
        )));
    }

    let n = problem.n();
    let mut bundle = EvalBundle::zeros(n, problem.p(), problem.m());
    let mut grad_rows = vec![0.0; grid.node_count() * n];
    let mut complementarity: f64 = 0.0;
    for (i, &t) in grid.nodes().iter().enumerate() {
        problem.evaluate_into(x.row(i), t, &mut bundle)?;
        combine_gradient(&bundle, u.row(i), v.row(i), &mut grad_rows[i * n..(i + 1) * n]);
        for (&vj, &gj) in v.row(i).iter().zip(&bundle.g) {
            complementarity = complementarity.max((vj * (-gj).max(0.0)).abs());
        }
    }
    let grad = Trajectory::new(grid.clone(), n, grad_rows)?;
    let multiplier_min = (problem.m() > 0)
        .then(|| v.values().iter().copied().fold(f64::INFINITY, f64::min));
    Ok(Residuals {
        stationarity_l1: l1_time_norm(&grad),
        complementarity_sup: complementarity,
        multiplier_min,
    })
}

/// Sum of squared violations at one node, `Σ hᵢ² + Σ max(gⱼ, 0)²`.
fn violation_sq(b: &EvalBundle) -> f64 {
    b.h.iter().map(|h| h * h).sum::<f64>() + b.g.iter().map(|g| g.max(0.0).powi(2)).sum::<f64>()
}

/// `Θ(x)` by trapezoid quadrature.
pub fn feasibility_factor(problem: &ProblemDefinition, grid: &TimeGrid, x: &Trajectory) -> Result<f64> {
    check_on_grid(grid, &[("x", x, problem.n())])?;
    let mut bundle = EvalBundle::zeros(problem.n(), problem.p(), problem.m());
    let mut integrand = Vec::with_capacity(grid.node_count());
    for (i, &t) in grid.nodes().iter().enumerate() {
        problem.evaluate_into(x.row(i), t, &mut bundle)?;
        integrand.push(violation_sq(&bundle));
    }
    Ok(grid.trapezoid(&integrand))
}

/// Discrete `∫ ‖2 Σᵢ hᵢ∇hᵢ + 2 Σⱼ max(gⱼ, 0)∇gⱼ‖₁ dt`, zero exactly at the
/// stationary points of `Θ`.
pub fn feasibility_stationarity_residual(
    problem: &ProblemDefinition,
    grid: &TimeGrid,
    x: &Trajectory,
) -> Result<f64> {
    check_on_grid(grid, &[("x", x, problem.n())])?;
    let n = problem.n();
    let mut bundle = EvalBundle::zeros(n, problem.p(), problem.m());
    let mut rows = vec![0.0; grid.node_count() * n];
    for (i, &t) in grid.nodes().iter().enumerate() {
        problem.evaluate_into(x.row(i), t, &mut bundle)?;
        let coeff_h: Vec<f64> = bundle.h.iter().map(|h| 2.0 * h).collect();
        let coeff_g: Vec<f64> = bundle.g.iter().map(|g| 2.0 * g.max(0.0)).collect();
        bundle.grad_phi.iter_mut().for_each(|d| *d = 0.0);
        combine_gradient(&bundle, &coeff_h, &coeff_g, &mut rows[i * n..(i + 1) * n]);
    }
    Ok(l1_time_norm(&Trajectory::new(grid.clone(), n, rows)?))
}

/// `max(sup |h|, sup max(g, 0))` over all nodes.
pub fn max_violation(problem: &ProblemDefinition, grid: &TimeGrid, x: &Trajectory) -> Result<f64> {
    check_on_grid(grid, &[("x", x, problem.n())])?;
    let mut bundle = EvalBundle::zeros(problem.n(), problem.p(), problem.m());
    let mut worst: f64 = 0.0;
    for (i, &t) in grid.nodes().iter().enumerate() {
        problem.evaluate_into(x.row(i), t, &mut bundle)?;
        for h in &bundle.h {
            worst = worst.max(h.abs());
        }
        for g in &bundle.g {
            worst = worst.max(*g);
        }
    }
    Ok(worst)
}

/// Trapezoid quadrature of `φ` along `x`, the discrete objective value.
pub fn objective_quadrature(problem: &ProblemDefinition, grid: &TimeGrid, x: &Trajectory) -> Result<f64> {
    check_on_grid(grid, &[("x", x, problem.n())])?;
    let samples: Vec<f64> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &t)| problem.eval_phi(x.row(i), t))
        .collect();
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("objective is not finite along the trajectory"));
    }
    Ok(grid.trapezoid(&samples))
}
