//! Scaled adaptive generalized FISTA for strongly convex composite problems
//! `min_x f(x) + g(x)`, with variable diagonal metrics, adaptive backtracking
//! and duality-gap certified inexact proximal steps.
//!
//! ```
//! use std::sync::Arc;
//! use sagefista::prelude::*;
//!
//! let f = Arc::new(Quadratic::new(vec![1.0, 2.0], vec![3.0, -1.0]).unwrap());
//! let g = StructuredNonsmooth::new(vec![], Psi::indicator(BoxSet::nonnegative()));
//! let problem = CompositeProblem::new(f, g).unwrap();
//! let config = SolverConfig::default();
//! let out = solve(&problem, &config, &[0.0, 0.0]).unwrap();
//! assert!((out.x[0] - 3.0).abs() < 1e-6 && out.x[1].abs() < 1e-6);
//! ```

pub mod data;
pub mod error;
pub mod harness;
pub mod image;
pub mod linalg;
pub mod metric;
pub mod operator;
pub mod problems;
pub mod prox;
pub mod solver;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::metric::{BoxSet, DiagonalMetric, MetricMode, SqueezeSchedule};
    pub use crate::operator::{IdentityOperator, LinearOperator};
    pub use crate::problems::{CompositeProblem, Quadratic, SmoothPart};
    pub use crate::prox::{BlockNorm, NormBlock, Psi, StructuredNonsmooth};
    pub use crate::solver::{solve, EpsilonMode, SolveOutput, SolverConfig};
}
