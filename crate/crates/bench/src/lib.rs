//! Replicated benchmark comparing completion accuracy across missing-data
//! mechanisms.
//!
//! [`run_experiment`] samples a low-rank matrix per replication, hides
//! entries under each configured mechanism, completes the matrix and scores
//! the estimate. The cells are aggregated into a [`BenchReport`], which
//! [`render::render`] turns into a table, CSV or JSON.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod config;
pub mod error;
pub mod experiment;
pub mod render;
pub mod seed;

pub use config::{ExperimentConfig, LambdaPolicy, OutputFormat, SolverKind, TestKind};
pub use error::{BenchError, Result};
pub use experiment::{
    run_experiment, run_experiment_with_progress, BenchReport, CellRecord, Comparison,
};
