//! A laboratory for smoothed online convex optimization (SOCO).
//!
//! Each round an online learner observes a nonnegative convex hitting cost
//! `f_t`, picks a point `x_t`, and pays `f_t(x_t)` plus a movement cost
//! `c(x_t, x_{t-1})` given by a Bregman divergence (squared l2 as the special
//! case). The crate provides:
//!
//! * the online algorithms OBD, Greedy OBD, and Regularized OBD, plus the
//!   `stay_put` / `follow_minimizer` baselines ([`algorithms`]);
//! * offline-optimal and movement-budgeted offline oracles ([`offline`]);
//! * generators for the adversarial instances that realize the known lower
//!   bounds, including an adaptive circle adversary against OBD
//!   ([`adversaries`]);
//! * a harness measuring competitive ratios, budgeted regret, and how the
//!   ratio scales in the curvature parameter `m` ([`harness`]).

pub mod adversaries;
pub mod algorithms;
pub mod costs;
pub mod geometry;
pub mod harness;
pub mod offline;
pub mod solver;

pub use adversaries::Instance;
pub use algorithms::{AlgoConfig, Algorithm, RunResult};
pub use costs::HittingCost;
pub use geometry::{MovementCost, Point, Potential};
pub use solver::SolveSettings;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point has a non-finite coordinate: {0:?}")]
    NonFinitePoint(Vec<f64>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point outside the potential's domain: {0}")]
    DomainViolation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("solver did not converge within {iters} iterations (residual {residual:.3e})")]
    MaxItersExceeded {
        iters: usize,
        residual: f64,
        /// Best iterate found before giving up.
        best: Point,
    },
    #[error("non-finite objective value encountered during a solve")]
    NonFiniteObjective,
    #[error("sublevel target {level} is below the cost minimum {min_value}")]
    LevelBelowMinimum { level: f64, min_value: f64 },
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("degenerate adversary geometry at round {round}: {reason}")]
    DegenerateGeometry { round: usize, reason: String },
    #[error("offline oracle did not converge (residual {residual:.3e})")]
    OracleNotConverged { residual: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
