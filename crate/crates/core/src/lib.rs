//! Low-rank matrix completion with explicit missing-data mechanisms.
//!
//! The crate covers the full simulation loop used to compare completion
//! accuracy across missingness mechanisms:
//!
//! - [`linalg`]: dense matrices, observation masks, thin SVD and the
//!   masked projections `P_Ω` / `P_Ω⊥`.
//! - [`model`]: generators for the complete data `Y = Z + E`, either with a
//!   Gaussian-scaled spectrum or with Laplace-distributed singular values.
//! - [`missingness`]: MCAR, row-permuted MAR and logistic NMAR mask
//!   generators plus mask diagnostics.
//! - [`solvers`]: soft-impute (nuclear-norm penalty), hard-impute (rank
//!   constraint), objective evaluation and hold-out λ selection.
//! - [`metrics`]: the relative completion error, Welch and paired t-tests,
//!   and replication summaries.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod error;
pub mod linalg;
pub mod metrics;
pub mod missingness;
pub mod model;
pub mod solvers;
pub mod special;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, LowRankFactors, ObservationMask};
