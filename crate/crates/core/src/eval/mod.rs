//! Selection and prediction metrics, the univariable meta-analysis
//! baseline, and per-scenario summaries.

mod baseline;
mod metrics;
mod summary;

pub use baseline::{
    fit_univariable_logistic, fixed_effects, meta_estimates, univariable_meta_baseline, wald_p_value, LogisticFit,
    MetaEstimate,
};
pub use metrics::{auc, selection_metrics, SelectionMetrics};
pub use summary::{
    plot_calls_vs_values, plot_selection_vs_sites, read_runs, summarize, summarize_dir, write_csv, write_summary,
    MetricsSummary, RunKey, RunRecord,
};

use thiserror::Error;

/// Number of selected covariates that define a model's selection.
pub const SELECTION_SIZE: usize = 10;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no results to evaluate")]
    EmptyResults,
    #[error("AUC needs both outcome classes")]
    SingleClass,
    #[error("scores contain NaN")]
    NonFinite,
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("plot: {0}")]
    Plot(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
