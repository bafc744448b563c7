//! Post-solve certificates and error metrics against reference solutions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagrangian::{feasibility_factor, feasibility_stationarity_residual, max_violation, Residuals};
use crate::problem::{EvalBundle, ProblemDefinition};
use crate::timegrid::{TimeGrid, Trajectory};

/// Default tolerances for the certificates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Slack for `Σ uᵢhᵢ + Σ vⱼgⱼ ≥ 0`.
    pub hypothesis: f64,
    /// `sup` violation above which a point counts as infeasible.
    pub feasibility: f64,
    /// Stationarity residual of `Θ` below which it counts as stationary.
    pub stationarity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hypothesis: 1e-6,
            feasibility: 1e-6,
            stationarity: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    AkktHolds,
    GlobalOptimalByConvexity,
    NotApplicable,
    HypothesisViolated,
    InfeasibleButThetaStationary,
    InfeasibleNotStationary,
}

/// Numbers backing a certificate. Fields that do not apply stay `None`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Evidence {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stationarity_l1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub complementarity_sup: Option<f64>,
    /// Smallest node value of `Σ uᵢhᵢ + Σ vⱼgⱼ`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_pairing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub worst_node: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub worst_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_violation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub theta_stationarity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub evidence: Evidence,
}

/// `AkktHolds` when both residuals are at most `tol`.
pub fn akkt_certificate(residuals: &Residuals, tol: f64) -> Option<Certificate> {
    (residuals.stationarity_l1 <= tol && residuals.complementarity_sup <= tol).then(|| Certificate {
        kind: CertificateKind::AkktHolds,
        evidence: Evidence {
            stationarity_l1: Some(residuals.stationarity_l1),
            complementarity_sup: Some(residuals.complementarity_sup),
            ..Evidence::default()
        },
    })
}

/// Global optimality by convexity: all convexity flags hold and
/// `Σ uᵢhᵢ + Σ vⱼgⱼ ≥ -tol` at every node of the final iterate.
pub fn sufficiency_certificate(
    problem: &ProblemDefinition,
    grid: &TimeGrid,
    x: &Trajectory,
    u: &Trajectory,
    v: &Trajectory,
    tol: f64,
) -> Result<Certificate> {
    for (what, traj, dim) in [("x", x, problem.n()), ("u", u, problem.p()), ("v", v, problem.m())] {
        if traj.grid() != grid || traj.dim() != dim {
            return Err(Error::invalid(format!("{what} must have {dim} components on the grid")));
        }
    }
    if v.values().iter().any(|&vj| vj < 0.0) {
        return Err(Error::invalid("inequality multipliers must be nonnegative"));
    }

    let cx = problem.convexity();
    if !cx.all_hold() {
        let mut failing = Vec::new();
        if !cx.phi_convex {
            failing.push("phi_convex".to_string());
        }
        failing.extend(cx.h_affine.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| format!("h_affine[{i}]")));
        failing.extend(cx.g_convex.iter().enumerate().filter(|(_, ok)| !**ok).map(|(j, _)| format!("g_convex[{j}]")));
        return Ok(Certificate {
            kind: CertificateKind::NotApplicable,
            evidence: Evidence {
                detail: Some(format!("convexity flags not set: {}", failing.join(", "))),
                ..Evidence::default()
            },
        });
    }

    let mut bundle = EvalBundle::zeros(problem.n(), problem.p(), problem.m());
    let mut worst = (f64::INFINITY, 0usize);
    for (i, &t) in grid.nodes().iter().enumerate() {
        problem.evaluate_into(x.row(i), t, &mut bundle)?;
        let pairing: f64 = u.row(i).iter().zip(&bundle.h).map(|(a, b)| a * b).sum::<f64>()
            + v.row(i).iter().zip(&bundle.g).map(|(a, b)| a * b).sum::<f64>();
        if pairing < worst.0 {
            worst = (pairing, i);
        }
    }
    let (min_pairing, node) = if grid.node_count() == 0 { (0.0, 0) } else { worst };
    let kind = if min_pairing >= -tol {
        CertificateKind::GlobalOptimalByConvexity
    } else {
        CertificateKind::HypothesisViolated
    };
    Ok(Certificate {
        kind,
        evidence: Evidence {
            min_pairing: Some(min_pairing),
            worst_node: Some(node),
            worst_t: Some(grid.nodes()[node]),
            ..Evidence::default()
        },
    })
}

/// `None` when `x` is feasible to `feas_tol`; otherwise reports whether `x`
/// is a stationary point of the infeasibility measure `Θ`.
pub fn infeasibility_report(
    problem: &ProblemDefinition,
    grid: &TimeGrid,
    x: &Trajectory,
    feas_tol: f64,
    stat_tol: f64,
) -> Result<Option<Certificate>> {
    let violation = max_violation(problem, grid, x)?;
    if violation <= feas_tol {
        return Ok(None);
    }
    let theta = feasibility_factor(problem, grid, x)?;
    let stationarity = feasibility_stationarity_residual(problem, grid, x)?;
    let kind = if stationarity <= stat_tol {
        CertificateKind::InfeasibleButThetaStationary
    } else {
        CertificateKind::InfeasibleNotStationary
    };
    Ok(Some(Certificate {
        kind,
        evidence: Evidence {
            theta: Some(theta),
            max_violation: Some(violation),
            theta_stationarity: Some(stationarity),
            ..Evidence::default()
        },
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    /// `max` over unmasked nodes of `‖a - b‖∞`.
    pub sup_error: f64,
    /// Trapezoid `∫ ‖a - b‖₁ dt` with masked nodes contributing zero.
    pub l1_error: f64,
    pub masked_nodes: Vec<usize>,
}

/// Nodes strictly closer than one grid spacing to any of `discontinuities`.
/// Neighbours at exactly one spacing are kept despite rounding in the nodes.
pub fn masked_nodes(grid: &TimeGrid, discontinuities: &[f64]) -> Vec<usize> {
    let h = grid.spacing() * (1.0 - 1e-9);
    grid.nodes()
        .iter()
        .enumerate()
        .filter(|(_, &t)| discontinuities.iter().any(|&d| (t - d).abs() < h))
        .map(|(i, _)| i)
        .collect()
}

/// Distance between two trajectories on the same grid, ignoring nodes
/// near `discontinuities`. Symmetric in `a` and `b`.
pub fn trajectory_distance(a: &Trajectory, b: &Trajectory, discontinuities: &[f64]) -> Result<ErrorMetrics> {
    if a.grid() != b.grid() || a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "trajectories differ in grid or dimension ({} vs {} components)",
            a.dim(),
            b.dim()
        )));
    }
    let grid = a.grid();
    let masked = masked_nodes(grid, discontinuities);
    let mut sup: f64 = 0.0;
    let mut samples = Vec::with_capacity(grid.node_count());
    for i in 0..grid.node_count() {
        if masked.binary_search(&i).is_ok() {
            samples.push(0.0);
            continue;
        }
        let mut l1 = 0.0;
        for (x, y) in a.row(i).iter().zip(b.row(i)) {
            let d = (x - y).abs();
            sup = sup.max(d);
            l1 += d;
        }
        samples.push(l1);
    }
    Ok(ErrorMetrics {
        sup_error: sup,
        l1_error: grid.trapezoid(&samples),
        masked_nodes: masked,
    })
}

/// Error of `x` against the problem's reference solution.
pub fn solution_error(problem: &ProblemDefinition, x: &Trajectory) -> Result<ErrorMetrics> {
    let reference = problem
        .reference()
        .ok_or_else(|| Error::Unsupported(format!("problem `{}` has no reference solution", problem.name())))?;
    let ref_traj = problem.reference_trajectory(x.grid())?;
    trajectory_distance(x, &ref_traj, reference.discontinuities())
}
