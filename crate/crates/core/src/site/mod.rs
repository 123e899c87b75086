//! One data site: the only place individual-level data lives.
//!
//! A site standardizes its own copy of the data (locally, or with
//! consortium-wide moments broadcast by the coordinator) and answers
//! requests for sums over its individuals.

mod dataset;
mod node;
mod stats;

pub use dataset::{SiteDataset, StandardizationMode, StandardizationParams, StandardizedSite};
pub use node::SiteNode;
pub use stats::{
    apply_global_standardization, covariance_block, global_moment_contrib, global_ssq_contrib, standardize_local,
    univariable_stats, MomentSums, SsqSums,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SiteError {
    #[error("column {0} is constant at this site and cannot be standardized")]
    DegenerateColumn(usize),
    #[error("data have not been standardized yet")]
    NotStandardized,
    #[error("covariate index {index} out of range for p={p}")]
    IndexOutOfRange { index: usize, p: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
