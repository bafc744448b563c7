//! Safeguarded augmented Lagrangian method for continuous-time nonlinear
//! programs
//!
//! ```text
//! minimize ∫₀ᵀ φ(x(t), t) dt
//! subject to h(x(t), t) = 0, g(x(t), t) ≤ 0 for a.e. t ∈ [0, T],
//! ```
//!
//! discretized on a uniform time grid. The subproblem at each outer
//! iteration decouples into independent node problems, which are solved in
//! parallel. Termination uses pointwise asymptotic-KKT residuals, and the
//! [`diagnostics`] module produces post-solve certificates.

pub mod alm;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod inner;
pub mod lagrangian;
pub mod problem;
mod svg;
pub mod timegrid;

pub use alm::{solve, AlmConfig, IterationRecord, SolveReport, SolveStatus};
pub use diagnostics::{Certificate, CertificateKind, ErrorMetrics};
pub use error::{Error, Result};
pub use inner::{InnerConfig, NodeStatus};
pub use lagrangian::{MultiplierSet, Residuals};
pub use problem::{builtin, ProblemDefinition, BUILTIN_NAMES};
pub use timegrid::{TimeGrid, Trajectory};
