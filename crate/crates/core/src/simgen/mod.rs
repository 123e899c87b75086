//! Simulated consortia: correlated ternary covariates, sparse effects,
//! binary outcomes, and random splits into equally sized cohorts.
//!
//! Each replicate `r` of a scenario with seed `s` draws its data from a
//! ChaCha8 generator keyed by `s` on stream `r`. The cohort split uses
//! stream `r | 2^63`, so changing the number of sites leaves the pooled
//! data unchanged.

mod generate;
mod scenario;

pub use generate::{
    gen_covariates, gen_outcome, generate_replicate, place_effects, read_truth, replicate_rng, split_cohorts,
    write_replicate, write_truth, Replicate, TruthVector,
};
pub use scenario::{copy_probability, EffectSpec, Scenario, Structure, DESK_P, FULL_P};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("cannot place {count} effects ({per_group} per group) in p={p} covariates")]
    LayoutInfeasible { count: usize, per_group: usize, p: usize },
    #[error("n={n} is not divisible into {sites} equal cohorts")]
    IndivisibleSplit { n: usize, sites: usize },
    #[error(transparent)]
    Site(#[from] crate::site::SiteError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
