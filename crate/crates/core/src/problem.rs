//! Continuous-time programs
//!
//! ```text
//! minimize    ∫₀ᵀ φ(x(t), t) dt
//! subject to  h(x(t), t) = 0,  g(x(t), t) ≤ 0   for a.e. t ∈ [0, T]
//! ```
//!
//! A [`ProblemDefinition`] carries the pointwise evaluators for `φ`, `h`, `g`
//! and their spatial derivatives. Jacobians are row-major, one row per
//! constraint. The built-in instances are available through [`builtin`].

use std::fmt;

use crate::error::{Error, Result};
use crate::timegrid::{TimeGrid, Trajectory};

pub type ScalarFn = Box<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
/// Writes its output into the trailing slice.
pub type VectorFn = Box<dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync>;
pub type ReferenceFn = Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Structural facts used by the convexity-based optimality certificate.
/// They are trusted, never verified numerically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convexity {
    pub phi_convex: bool,
    pub h_affine: Vec<bool>,
    pub g_convex: Vec<bool>,
}

impl Convexity {
    pub fn all_hold(&self) -> bool {
        self.phi_convex && self.h_affine.iter().all(|&b| b) && self.g_convex.iter().all(|&b| b)
    }
}

/// Closed-form solution with the times where it jumps.
pub struct Reference {
    eval: ReferenceFn,
    discontinuities: Vec<f64>,
}

impl Reference {
    pub fn new(eval: ReferenceFn, discontinuities: Vec<f64>) -> Self {
        Self {
            eval,
            discontinuities,
        }
    }

    pub fn discontinuities(&self) -> &[f64] {
        &self.discontinuities
    }
}

pub struct ProblemDefinition {
    name: String,
    n: usize,
    p: usize,
    m: usize,
    horizon: f64,
    phi: ScalarFn,
    grad_phi: VectorFn,
    h: VectorFn,
    jac_h: VectorFn,
    g: VectorFn,
    jac_g: VectorFn,
    convexity: Convexity,
    reference: Option<Reference>,
}

impl fmt::Debug for ProblemDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDefinition")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("p", &self.p)
            .field("m", &self.m)
            .field("horizon", &self.horizon)
            .field("convexity", &self.convexity)
            .field("has_reference", &self.reference.is_some())
            .finish()
    }
}

/// All pointwise quantities at one `(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalBundle {
    pub phi: f64,
    pub grad_phi: Vec<f64>,
    pub h: Vec<f64>,
    /// `p x n`, row-major.
    pub jac_h: Vec<f64>,
    pub g: Vec<f64>,
    /// `m x n`, row-major.
    pub jac_g: Vec<f64>,
}

impl EvalBundle {
    pub fn zeros(n: usize, p: usize, m: usize) -> Self {
        Self {
            phi: 0.0,
            grad_phi: vec![0.0; n],
            h: vec![0.0; p],
            jac_h: vec![0.0; p * n],
            g: vec![0.0; m],
            jac_g: vec![0.0; m * n],
        }
    }
}

impl ProblemDefinition {
    pub fn builder(name: impl Into<String>, n: usize, horizon: f64) -> ProblemBuilder {
        ProblemBuilder {
            name: name.into(),
            n,
            horizon,
            objective: None,
            phi_convex: false,
            eq: None,
            ineq: None,
            reference: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of equality constraints.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of inequality constraints.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn convexity(&self) -> &Convexity {
        &self.convexity
    }

    pub fn reference(&self) -> Option<&Reference> {
        self.reference.as_ref()
    }

    pub fn has_reference(&self) -> bool {
        self.reference.is_some()
    }

    pub fn grid(&self, node_count: usize) -> Result<TimeGrid> {
        TimeGrid::uniform(self.horizon, node_count)
    }

    pub fn eval_phi(&self, x: &[f64], t: f64) -> f64 {
        (self.phi)(x, t)
    }

    pub fn eval_grad_phi(&self, x: &[f64], t: f64, out: &mut [f64]) {
        (self.grad_phi)(x, t, out)
    }

    pub fn eval_h(&self, x: &[f64], t: f64, out: &mut [f64]) {
        if self.p > 0 {
            (self.h)(x, t, out)
        }
    }

    pub fn eval_jac_h(&self, x: &[f64], t: f64, out: &mut [f64]) {
        if self.p > 0 {
            (self.jac_h)(x, t, out)
        }
    }

    pub fn eval_g(&self, x: &[f64], t: f64, out: &mut [f64]) {
        if self.m > 0 {
            (self.g)(x, t, out)
        }
    }

    pub fn eval_jac_g(&self, x: &[f64], t: f64, out: &mut [f64]) {
        if self.m > 0 {
            (self.jac_g)(x, t, out)
        }
    }

    /// Fills `out` in one pass; fails on the first non-finite quantity.
    pub fn evaluate_into(&self, x: &[f64], t: f64, out: &mut EvalBundle) -> Result<()> {
        self.check_point(x, t)?;
        out.phi = self.eval_phi(x, t);
        self.eval_grad_phi(x, t, &mut out.grad_phi);
        self.eval_h(x, t, &mut out.h);
        self.eval_jac_h(x, t, &mut out.jac_h);
        self.eval_g(x, t, &mut out.g);
        self.eval_jac_g(x, t, &mut out.jac_g);

        let fields: [(&'static str, &[f64]); 6] = [
            ("phi", std::slice::from_ref(&out.phi)),
            ("grad_phi", &out.grad_phi),
            ("h", &out.h),
            ("jac_h", &out.jac_h),
            ("g", &out.g),
            ("jac_g", &out.jac_g),
        ];
        for (what, values) in fields {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Evaluation {
                    what,
                    t,
                    x: x.to_vec(),
                });
            }
        }
        Ok(())
    }

    pub fn evaluate_all(&self, x: &[f64], t: f64) -> Result<EvalBundle> {
        let mut bundle = EvalBundle::zeros(self.n, self.p, self.m);
        self.evaluate_into(x, t, &mut bundle)?;
        Ok(bundle)
    }

    pub fn reference_solution(&self, t: f64) -> Result<Vec<f64>> {
        let reference = self.reference.as_ref().ok_or_else(|| {
            Error::Unsupported(format!("problem `{}` has no reference solution", self.name))
        })?;
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::invalid(format!(
                "t = {t} outside [0, {}]",
                self.horizon
            )));
        }
        Ok((reference.eval)(t))
    }

    /// Reference solution sampled at every node of `grid`.
    pub fn reference_trajectory(&self, grid: &TimeGrid) -> Result<Trajectory> {
        let mut rows = Vec::with_capacity(grid.node_count() * self.n);
        for &t in grid.nodes() {
            rows.extend(self.reference_solution(t)?);
        }
        Trajectory::new(grid.clone(), self.n, rows)
    }

    fn check_point(&self, x: &[f64], t: f64) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::invalid(format!(
                "`{}` expects x in R^{}, got {} components",
                self.name,
                self.n,
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                what: "x",
                t,
                x: x.to_vec(),
            });
        }
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::invalid(format!(
                "t = {t} outside [0, {}]",
                self.horizon
            )));
        }
        Ok(())
    }
}

/// Assembles a [`ProblemDefinition`] from closures.
pub struct ProblemBuilder {
    name: String,
    n: usize,
    horizon: f64,
    objective: Option<(ScalarFn, VectorFn)>,
    phi_convex: bool,
    eq: Option<(usize, VectorFn, VectorFn, Vec<bool>)>,
    ineq: Option<(usize, VectorFn, VectorFn, Vec<bool>)>,
    reference: Option<Reference>,
}

impl ProblemBuilder {
    pub fn objective<F, G>(mut self, phi: F, grad: G, convex: bool) -> Self
    where
        F: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], f64, &mut [f64]) + Send + Sync + 'static,
    {
        self.objective = Some((Box::new(phi), Box::new(grad)));
        self.phi_convex = convex;
        self
    }

    /// `p` equality constraints; `affine[i]` marks `h_i(·, t)` affine.
    pub fn equalities<F, J>(mut self, p: usize, h: F, jac: J, affine: Vec<bool>) -> Self
    where
        F: Fn(&[f64], f64, &mut [f64]) + Send + Sync + 'static,
        J: Fn(&[f64], f64, &mut [f64]) + Send + Sync + 'static,
    {
        self.eq = Some((p, Box::new(h), Box::new(jac), affine));
        self
    }

    /// `m` inequality constraints; `convex[j]` marks `g_j(·, t)` convex.
    pub fn inequalities<F, J>(mut self, m: usize, g: F, jac: J, convex: Vec<bool>) -> Self
    where
        F: Fn(&[f64], f64, &mut [f64]) + Send + Sync + 'static,
        J: Fn(&[f64], f64, &mut [f64]) + Send + Sync + 'static,
    {
        self.ineq = Some((m, Box::new(g), Box::new(jac), convex));
        self
    }

    pub fn reference<F>(mut self, eval: F, discontinuities: Vec<f64>) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.reference = Some(Reference::new(Box::new(eval), discontinuities));
        self
    }

    pub fn build(self) -> Result<ProblemDefinition> {
        if self.n == 0 {
            return Err(Error::invalid("state dimension must be at least 1"));
        }
        if !self.horizon.is_finite() || self.horizon <= 0.0 {
            return Err(Error::invalid(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        let (phi, grad_phi) = self
            .objective
            .ok_or_else(|| Error::invalid("objective is required"))?;
        let noop = || -> VectorFn { Box::new(|_: &[f64], _: f64, _: &mut [f64]| {}) };
        let (p, h, jac_h, h_affine) = self.eq.unwrap_or_else(|| (0, noop(), noop(), vec![]));
        let (m, g, jac_g, g_convex) = self.ineq.unwrap_or_else(|| (0, noop(), noop(), vec![]));
        if h_affine.len() != p || g_convex.len() != m {
            return Err(Error::invalid(
                "one convexity flag per constraint is required",
            ));
        }
        Ok(ProblemDefinition {
            name: self.name,
            n: self.n,
            p,
            m,
            horizon: self.horizon,
            phi,
            grad_phi,
            h,
            jac_h,
            g,
            jac_g,
            convexity: Convexity {
                phi_convex: self.phi_convex,
                h_affine,
                g_convex,
            },
            reference: self.reference,
        })
    }
}

pub const BUILTIN_NAMES: [&str; 6] = ["ex1", "ex2", "ex3", "ex4", "akkt_example", "infeasible1"];

pub fn builtin(name: &str) -> Result<ProblemDefinition> {
    let problem = match name {
        "ex1" => ex1(),
        "ex2" => ex2(),
        "ex3" => ex3(),
        "ex4" => ex4(),
        "akkt_example" => akkt_example(),
        "infeasible1" => infeasible1(),
        _ => {
            return Err(Error::NotFound {
                name: name.to_string(),
                valid: BUILTIN_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(problem.expect("built-in problems are well formed"))
}

/// Sign function with `sgn(0) = 0`.
fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

// min ∫ x1² + x2  s.t.  -x2 ≤ 0,  -x1² - x2 ≤ 0
fn ex1() -> Result<ProblemDefinition> {
    ProblemDefinition::builder("ex1", 2, 1.0)
        .objective(
            |x, _| x[0] * x[0] + x[1],
            |x, _, d| {
                d[0] = 2.0 * x[0];
                d[1] = 1.0;
            },
            true,
        )
        .inequalities(
            2,
            |x, _, g| {
                g[0] = -x[1];
                g[1] = -x[0] * x[0] - x[1];
            },
            |x, _, j| {
                j.copy_from_slice(&[0.0, -1.0, -2.0 * x[0], -1.0]);
            },
            vec![true, false],
        )
        .reference(|_| vec![0.0, 0.0], vec![])
        .build()
}

// min ∫ x1  with three t-dependent quadratic inequalities
fn ex2() -> Result<ProblemDefinition> {
    ProblemDefinition::builder("ex2", 2, 1.0)
        .objective(
            |x, _| x[0],
            |_, _, d| {
                d[0] = 1.0;
                d[1] = 0.0;
            },
            true,
        )
        .inequalities(
            3,
            |x, t, g| {
                let sq = x[0] * x[0];
                g[0] = sq - 2.0 * x[0] + x[1] - t;
                g[1] = sq - 2.0 * x[0] - x[1] + t;
                g[2] = -sq + 0.5 * x[0] + x[1] - t;
            },
            |x, _, j| {
                j.copy_from_slice(&[
                    2.0 * x[0] - 2.0,
                    1.0,
                    2.0 * x[0] - 2.0,
                    -1.0,
                    -2.0 * x[0] + 0.5,
                    1.0,
                ]);
            },
            vec![true, true, false],
        )
        .reference(|t| vec![0.0, t], vec![])
        .build()
}

// min ∫ (x1-1)² + (x2-1)² - x3²  with one equality and two inequalities
fn ex3() -> Result<ProblemDefinition> {
    ProblemDefinition::builder("ex3", 3, 1.0)
        .objective(
            |x, _| (x[0] - 1.0).powi(2) + (x[1] - 1.0).powi(2) - x[2] * x[2],
            |x, _, d| {
                d[0] = 2.0 * (x[0] - 1.0);
                d[1] = 2.0 * (x[1] - 1.0);
                d[2] = -2.0 * x[2];
            },
            false,
        )
        .equalities(
            1,
            |x, _, h| h[0] = x[0] * x[0] + x[1] * x[1] - x[2] - 2.0,
            |x, _, j| j.copy_from_slice(&[2.0 * x[0], 2.0 * x[1], -1.0]),
            vec![false],
        )
        .inequalities(
            2,
            |x, _, g| {
                g[0] = 2.0 * x[0] * x[1] - 4.0 * x[1] - x[2] + 2.0;
                g[1] = -x[0] - 0.5 * x[2] + 1.0;
            },
            |x, _, j| {
                j.copy_from_slice(&[
                    2.0 * x[1],
                    2.0 * x[0] - 4.0,
                    -1.0,
                    -1.0,
                    0.0,
                    -0.5,
                ]);
            },
            vec![false, true],
        )
        .reference(|_| vec![1.0, 1.0, 0.0], vec![])
        .build()
}

fn ex4_matrix(t: f64) -> [[f64; 2]; 5] {
    [
        [0.0, -1.0],
        [-1.0, 0.0],
        [sgn(t - 1.0), sgn(1.0 - t)],
        [1.0, 1.0],
        [0.0, 1.0],
    ]
}

fn ex4_rhs(t: f64) -> [f64; 5] {
    [0.0, 0.0, 0.0, 3.0, 0.25 + 0.625 * t]
}

// linear: min ∫₀² c(t)ᵀx  s.t.  A(t)x - b(t) ≤ 0
fn ex4() -> Result<ProblemDefinition> {
    let cost = |t: f64| [(t - 1.0) * sgn(1.0 - t), -1.0];
    ProblemDefinition::builder("ex4", 2, 2.0)
        .objective(
            move |x, t| {
                let c = cost(t);
                c[0] * x[0] + c[1] * x[1]
            },
            move |_, t, d| d.copy_from_slice(&cost(t)),
            true,
        )
        .inequalities(
            5,
            |x, t, g| {
                let (a, b) = (ex4_matrix(t), ex4_rhs(t));
                for (j, out) in g.iter_mut().enumerate() {
                    *out = a[j][0] * x[0] + a[j][1] * x[1] - b[j];
                }
            },
            |_, t, jac| {
                for (j, row) in ex4_matrix(t).iter().enumerate() {
                    jac[2 * j..2 * j + 2].copy_from_slice(row);
                }
            },
            vec![true; 5],
        )
        .reference(
            |t| {
                let upper = 0.25 + 0.625 * t;
                if t <= 1.0 {
                    vec![2.75 - 0.625 * t, upper]
                } else {
                    vec![upper, upper]
                }
            },
            vec![1.0],
        )
        .build()
}

// min ∫ (t-½) x1  s.t.  -(t-½) x1³ + x2 ≤ 0,  -x2 ≤ 0; KKT fails at x̄ = 0
fn akkt_example() -> Result<ProblemDefinition> {
    ProblemDefinition::builder("akkt_example", 2, 1.0)
        .objective(
            |x, t| (t - 0.5) * x[0],
            |_, t, d| {
                d[0] = t - 0.5;
                d[1] = 0.0;
            },
            true,
        )
        .inequalities(
            2,
            |x, t, g| {
                g[0] = -(t - 0.5) * x[0].powi(3) + x[1];
                g[1] = -x[1];
            },
            |x, t, j| {
                j.copy_from_slice(&[-3.0 * (t - 0.5) * x[0] * x[0], 1.0, 0.0, -1.0]);
            },
            vec![false, true],
        )
        .reference(|_| vec![0.0, 0.0], vec![])
        .build()
}

// empty feasible set: x² + 1 ≤ 0 never holds
fn infeasible1() -> Result<ProblemDefinition> {
    ProblemDefinition::builder("infeasible1", 1, 1.0)
        .objective(|x, _| x[0] * x[0], |x, _, d| d[0] = 2.0 * x[0], true)
        .inequalities(
            1,
            |x, _, g| g[0] = x[0] * x[0] + 1.0,
            |x, _, j| j[0] = 2.0 * x[0],
            vec![true],
        )
        .build()
}

/// Nodes closer than this to `t = ½` are rejected by
/// [`akkt_example_sequence`]; the multipliers blow up there.
pub const AKKT_EXAMPLE_EXCLUSION: f64 = 1e-3;

/// The closed-form AKKT sequence for `akkt_example` at index `k`:
/// `x^k = ((t-½)/k, 0)`, `v₁^k = v₂^k = k² / (3 (t-½)²)`.
///
/// Returns `(x, v)` on `grid`.
pub fn akkt_example_sequence(grid: &TimeGrid, k: u32) -> Result<(Trajectory, Trajectory)> {
    if k == 0 {
        return Err(Error::invalid("sequence index starts at 1"));
    }
    if let Some(&t) = grid
        .nodes()
        .iter()
        .find(|&&t| (t - 0.5).abs() < AKKT_EXAMPLE_EXCLUSION)
    {
        return Err(Error::invalid(format!(
            "node t = {t} lies within {AKKT_EXAMPLE_EXCLUSION} of 1/2 where the multipliers are unbounded"
        )));
    }
    let k = f64::from(k);
    let x = Trajectory::from_fn(grid, 2, |t| vec![(t - 0.5) / k, 0.0])?;
    let v = Trajectory::from_fn(grid, 2, |t| {
        let v = k * k / (3.0 * (t - 0.5).powi(2));
        vec![v, v]
    })?;
    Ok((x, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_dimensions() {
        let dims: Vec<(usize, usize, usize, f64)> = BUILTIN_NAMES
            .iter()
            .map(|n| {
                let p = builtin(n).unwrap();
                (p.n(), p.p(), p.m(), p.horizon())
            })
            .collect();
        assert_eq!(
            dims,
            vec![
                (2, 0, 2, 1.0),
                (2, 0, 3, 1.0),
                (3, 1, 2, 1.0),
                (2, 0, 5, 2.0),
                (2, 0, 2, 1.0),
                (1, 0, 1, 1.0),
            ]
        );
    }

    #[test]
    fn unknown_name_lists_valid_ones() {
        let err = builtin("nosuch").unwrap_err();
        let msg = err.to_string();
        for name in BUILTIN_NAMES {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn convexity_flags() {
        let ex1 = builtin("ex1").unwrap();
        assert!(ex1.convexity().phi_convex);
        assert_eq!(ex1.convexity().g_convex, vec![true, false]);
        assert!(!ex1.convexity().all_hold());
        assert!(builtin("ex4").unwrap().convexity().all_hold());
        assert!(!builtin("ex3").unwrap().convexity().all_hold());
    }

    #[test]
    fn hand_evaluations() {
        let b = builtin("ex1").unwrap().evaluate_all(&[0.0, 0.0], 0.3).unwrap();
        assert_eq!(b.phi, 0.0);
        assert_eq!(b.g, vec![0.0, 0.0]);

        let ex3 = builtin("ex3").unwrap();
        for t in [0.0, 0.37, 1.0] {
            let b = ex3.evaluate_all(&[1.0, 1.0, 0.0], t).unwrap();
            assert_eq!(b.h, vec![0.0]);
            assert_eq!(b.g, vec![0.0, 0.0]);
            assert_eq!(b.phi, 0.0);
        }
    }

    #[test]
    fn unconstrained_bundle_is_empty() {
        let p = ProblemDefinition::builder("sq", 1, 1.0)
            .objective(|x, _| x[0] * x[0], |x, _, d| d[0] = 2.0 * x[0], true)
            .build()
            .unwrap();
        let b = p.evaluate_all(&[3.0], 0.5).unwrap();
        assert_eq!(b.phi, 9.0);
        assert!(b.h.is_empty() && b.g.is_empty() && b.jac_h.is_empty() && b.jac_g.is_empty());
    }

    #[test]
    fn non_finite_evaluation_reports_point() {
        let p = ProblemDefinition::builder("log", 1, 1.0)
            .objective(|x, _| x[0].ln(), |x, _, d| d[0] = 1.0 / x[0], false)
            .build()
            .unwrap();
        match p.evaluate_all(&[0.0], 0.25) {
            Err(Error::Evaluation { what, t, x }) => {
                assert_eq!(what, "phi");
                assert_eq!(t, 0.25);
                assert_eq!(x, vec![0.0]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reference_values() {
        assert_eq!(builtin("ex2").unwrap().reference_solution(0.3).unwrap(), vec![0.0, 0.3]);
        assert_eq!(
            builtin("ex4").unwrap().reference_solution(0.5).unwrap(),
            vec![2.4375, 0.5625]
        );
        assert_eq!(builtin("ex1").unwrap().reference_solution(0.9).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(
            builtin("infeasible1").unwrap().reference_solution(0.5),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn ex4_reference_is_feasible_off_the_kink() {
        let p = builtin("ex4").unwrap();
        let grid = p.grid(85).unwrap();
        let mut g = [0.0; 5];
        for &t in grid.nodes() {
            if t == 1.0 {
                continue;
            }
            let x = p.reference_solution(t).unwrap();
            p.eval_g(&x, t, &mut g);
            assert!(g.iter().all(|&v| v <= 1e-12), "t = {t}: {g:?}");
        }
    }

    #[test]
    fn references_are_feasible() {
        for name in ["ex1", "ex2", "ex3"] {
            let p = builtin(name).unwrap();
            let grid = p.grid(85).unwrap();
            for &t in grid.nodes() {
                let b = p.evaluate_all(&p.reference_solution(t).unwrap(), t).unwrap();
                assert!(b.h.iter().all(|v| v.abs() <= 1e-12), "{name} h at {t}");
                assert!(b.g.iter().all(|&v| v <= 1e-12), "{name} g at {t}");
            }
        }
    }

    #[test]
    fn sgn_at_zero() {
        assert_eq!(sgn(0.0), 0.0);
        let p = builtin("ex4").unwrap();
        let b = p.evaluate_all(&[1.0, 1.0], 1.0).unwrap();
        assert_eq!(b.grad_phi, vec![0.0, -1.0]);
        assert_eq!(&b.jac_g[4..6], &[0.0, 0.0]);
    }

    #[test]
    fn akkt_sequence_rejects_midpoint_nodes() {
        let grid = TimeGrid::uniform(1.0, 85).unwrap();
        assert!(akkt_example_sequence(&grid, 1).is_err());
        let grid = TimeGrid::uniform(1.0, 84).unwrap();
        let (x, v) = akkt_example_sequence(&grid, 10).unwrap();
        assert_eq!(x.row(0), &[-0.05, 0.0]);
        assert!((v.row(0)[0] - 400.0 / 3.0).abs() < 1e-12);
    }
}
