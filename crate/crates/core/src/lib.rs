//! One-pass penalized linear regression.
//!
//! The data is streamed exactly once. Every record contributes to the additive
//! [`SufficientStats`] of a randomly assigned cross-validation fold, and every
//! later phase (standardization, Lasso/Ridge/Elastic-net solves, fold scoring,
//! the final fit) works from those aggregates alone.
//!
//! The objective is the unnormalized residual sum of squares plus penalty,
//!
//! ```text
//! ||Y - a*1 - X b||^2 + lambda * (mix * ||b||_1 + (1 - mix) * ||b||_2^2)
//! ```
//!
//! so penalty values scale with the number of samples.

pub mod artifact;
pub mod cv;
mod error;
pub mod ingest;
pub mod solver;
pub mod standardize;
pub mod stats;

pub use cv::{
    back_transform, cross_validate, fold_complement, test_mse_from_stats, train, CvOptions,
    CvReport, FittedModel, LinearModel,
};
pub use error::{Error, RecordRejection, Result};
pub use ingest::{
    assign_fold, ingest, parse_record, ColumnLayout, ColumnSelector, FoldedStats, IngestConfig,
    IngestOutcome, PassMetrics,
};
pub use solver::{
    coordinate_descent, lambda_grid, lambda_max, penalty_value, ridge_closed_form, solve_path,
    LambdaGrid, Penalty, PenaltySpec, SolveControl, StdSolution,
};
pub use standardize::{loss_from_stats, standardize, StandardizeOptions, StandardizedProblem};
pub use stats::{Sample, StatsAccumulator, SufficientStats};
