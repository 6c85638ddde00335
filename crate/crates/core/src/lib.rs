//! Stratified differentially private mean estimation.
//!
//! Data split into disjoint groups is privatized group by group (parallel
//! composition), and a global estimate is recovered by weighting the group
//! estimates. The crate provides clipped-Laplace and adaptive Gaussian
//! (Coinpress-style) estimators, closed-form error bounds and their
//! Dirichlet-averaged versions, synthetic mixture data, a parity metric for
//! per-group disparities, and marginal-based utilities for categorical tables.

// Negated float comparisons are used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coinpress;
pub mod datagen;
pub mod error;
pub mod mean;
pub mod parity;
pub mod privacy;
pub mod rng;
pub mod sample;
pub mod special;
pub mod tabular;
pub mod theory;

pub use error::{Error, Result};
pub use privacy::PrivacyBudget;
pub use rng::RngHandle;
pub use sample::{GroupKey, StratifiedSample, Stratum};
