//! Sparse logistic regression with weakly convex regularization.
//!
//! The objective is `l(θ) + β J(θ)` where `l` is the logistic negative
//! log-likelihood and `J(θ) = Σ_i F(θ_i)` is a weakly convex penalty such as
//! MCP. Minimization is by proximal gradient (iterative firm shrinkage for
//! MCP) with constant or backtracking stepsizes and optional Nesterov
//! momentum. The [`certify`] module turns the local-optimality theory into
//! runnable checks.

pub mod certify;
pub mod cli;
pub mod cv;
pub mod data;
pub mod dataset;
pub mod error;
pub mod linalg;
pub mod model;
pub mod model_file;
pub mod penalty;
pub mod presets;
pub mod solver;

pub use dataset::Dataset;
pub use error::{Error, ErrorClass, Result};
pub use model::ModelVector;
pub use penalty::{Mcp, PenaltyKind, PenaltySpec, WeaklyConvex};
pub use solver::{fit, FitResult, Init, SolverConfig, StepsizeRule};
