//! Universal line-search-free gradient methods for composite convex problems
//! `min f(x) + psi(x)` where `psi` is the indicator of a ball.
//!
//! The methods here need only the diameter `D` of the feasible set. They adapt
//! to the Hölder exponent and constant of `f` and to the noise level of the
//! gradient oracle without being told any of them. The step-size coefficient
//! `H` is updated by solving a scalar balance equation in closed form, so no
//! line search and no function values are required (apart from the
//! deterministic variants, which use the exact Bregman distance).
//!
//! Modules:
//!
//! - [`metric`]: diagonal Euclidean metric, primal/dual norms.
//! - [`problem`]: ball domain, prox/LMO step, losses, optimality certificate.
//! - [`oracle`]: exact, Gaussian and mini-batch gradient oracles.
//! - [`solvers`]: UGM, USGM, USFGM plus projected subgradient and AdaGrad-norm baselines.
//! - [`dataio`]: LIBSVM reader/writer and synthetic problem generators.

pub mod dataio;
pub mod error;
pub mod matrix;
pub mod metric;
pub mod oracle;
pub mod problem;
pub mod solvers;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use metric::MetricSpace;
