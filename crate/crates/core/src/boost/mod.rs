//! Componentwise likelihood-based boosting driven entirely by aggregated
//! statistics.
//!
//! The engine never sees individual-level rows. Every score it needs is
//! rebuilt from two kinds of pooled sums:
//!
//! * `A_j = Σ_i x_ij y_i`, the univariable cross-products, fetched once;
//! * `C_jk = Σ_i x_ij x_ik`, pairwise cross-products, fetched lazily.
//!
//! With the current coefficients `β`, the score of covariate `j` is
//! `S_j = A_j − Σ_{k: β_k ≠ 0} β_k C_jk`, which equals `Σ_i x_ij (y_i − ŷ_i)`
//! without materialising the fitted values. Which `C_jk` entries have to be
//! requested in a given step is decided by the [`FetchMode`] and the
//! planner in [`plan`].

mod cache;
mod config;
mod plan;
pub mod reference;
mod run;
mod state;

pub use cache::{AggregateCache, CovPair};
pub use config::{BoostingConfig, FetchMode};
pub use plan::{
    block_extension, compute_scores, heuristic_candidates, plan_fetch, scoring_set, select_update, step_candidates,
    FetchPlan, FetchReason, StepCandidates, Update,
};
pub use run::{
    run_boosting, AggregateProvider, Booster, BoostingRun, PathEntry, ProviderError, StepOutcome, StepRecord,
    StopReason, UnivariableStats,
};
pub use state::BoostingState;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoostError {
    #[error("invalid boosting configuration: {0}")]
    InvalidConfig(String),
    #[error("covariance ({j}, {k}) is not available in the cache")]
    MissingCovariance { j: usize, k: usize },
    #[error("candidate set is empty")]
    EmptyCandidateSet,
    #[error("score of covariate {j} is not finite")]
    NonFiniteScore { j: usize },
    #[error("diagonal cross-product of covariate {j} is {value}; expected a positive finite value")]
    DegenerateDiagonal { j: usize, value: f64 },
    #[error("column {0} is constant and cannot be standardized")]
    DegenerateColumn(usize),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Provider(#[from] ProviderError),
}
