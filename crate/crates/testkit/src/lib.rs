//! Independent numerical oracles for the `ctp-alm` test suites.
//!
//! Nothing in here knows about the solver. Gradients are checked against
//! central differences and node-wise minimizers against an exhaustive lattice
//! search, so a bug in the solver cannot leak into the expected values.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
    #[error("function is not finite near x (coordinate {coord}, value {value})")]
    NonFinite { coord: usize, value: f64 },
    #[error("lattice search supports 1 to 3 dimensions, got {0}")]
    BadDimension(usize),
    #[error("lattice needs at least 3 points per axis, got {0}")]
    TooFewPoints(usize),
}

/// Differencing scheme. Only central differences are provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FdScheme {
    #[default]
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub step: f64,
    pub scheme: FdScheme,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            step: 1e-6,
            scheme: FdScheme::Central,
        }
    }
}

/// Central-difference gradient `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn fd_gradient<F>(f: F, x: &[f64], cfg: &FdConfig) -> Result<Vec<f64>, OracleError>
where
    F: Fn(&[f64]) -> f64,
{
    if !cfg.step.is_finite() || cfg.step <= 0.0 {
        return Err(OracleError::BadStep(cfg.step));
    }
    let h = cfg.step;
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let fp = f(&probe);
        probe[i] = x[i] - h;
        let fm = f(&probe);
        probe[i] = x[i];
        for value in [fp, fm] {
            if !value.is_finite() {
                return Err(OracleError::NonFinite { coord: i, value });
            }
        }
        let d = match cfg.scheme {
            FdScheme::Central => (fp - fm) / (2.0 * h),
        };
        grad.push(d);
    }
    Ok(grad)
}

/// Central-difference Jacobian of a vector map, row-major `rows x x.len()`.
///
/// `f` writes `rows` outputs into its second argument.
pub fn fd_jacobian<F>(f: F, x: &[f64], rows: usize, cfg: &FdConfig) -> Result<Vec<f64>, OracleError>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = x.len();
    let mut jac = vec![0.0; rows * n];
    for r in 0..rows {
        let col = fd_gradient(
            |z| {
                let mut out = vec![0.0; rows];
                f(z, &mut out);
                out[r]
            },
            x,
            cfg,
        )?;
        jac[r * n..(r + 1) * n].copy_from_slice(&col);
    }
    Ok(jac)
}

/// Result of an exhaustive lattice search.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeMin {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    /// Distance between neighbouring lattice points along each axis.
    pub spacing: f64,
}

/// Exhaustive minimization of `f` over the axis-aligned lattice of
/// `points_per_axis^n` points covering `center ± radius`.
///
/// Points are visited in lexicographic index order (last axis fastest) and
/// only a strictly smaller value replaces the incumbent, so ties resolve to
/// the lexicographically smallest index. Non-finite values are skipped.
pub fn dense_grid_min<F>(
    f: F,
    center: &[f64],
    radius: f64,
    points_per_axis: usize,
) -> Result<LatticeMin, OracleError>
where
    F: Fn(&[f64]) -> f64,
{
    let n = center.len();
    if n == 0 || n > 3 {
        return Err(OracleError::BadDimension(n));
    }
    if points_per_axis < 3 {
        return Err(OracleError::TooFewPoints(points_per_axis));
    }
    let spacing = 2.0 * radius / (points_per_axis - 1) as f64;
    let coord = |axis: usize, idx: usize| center[axis] - radius + idx as f64 * spacing;

    let total = points_per_axis.pow(n as u32);
    let mut idx = vec![0usize; n];
    let mut point = vec![0.0; n];
    let mut best: Option<(Vec<f64>, f64)> = None;
    for flat in 0..total {
        let mut rem = flat;
        for axis in (0..n).rev() {
            idx[axis] = rem % points_per_axis;
            rem /= points_per_axis;
        }
        for axis in 0..n {
            point[axis] = coord(axis, idx[axis]);
        }
        let value = f(&point);
        if !value.is_finite() {
            continue;
        }
        match &best {
            Some((_, fb)) if value >= *fb => {}
            _ => best = Some((point.clone(), value)),
        }
    }
    let (x_best, f_best) = best.unwrap_or_else(|| (center.to_vec(), f64::NAN));
    Ok(LatticeMin {
        x_best,
        f_best,
        spacing,
    })
}
