//! Componentwise likelihood-based boosting for variable selection when the
//! individual-level data stay at their sites.
//!
//! Sites only ever answer with sums: a univariable score and diagonal once,
//! and covariance entries `x_j'x_k` on demand. The coordinator pools them
//! and runs the boosting steps, fetching covariances lazily according to a
//! [`boost::FetchMode`].
//!
//! ```no_run
//! use fedboost::boost::{run_boosting, BoostingConfig, FetchMode};
//! use fedboost::coordinator::Coordinator;
//! use fedboost::simgen::{generate_replicate, EffectSpec, Scenario, Structure};
//! use fedboost::site::StandardizationMode;
//! use fedboost::study::site_nodes;
//!
//! let scenario = Scenario::desk(500, Structure::Grouped, EffectSpec::strong()).with_sites(5);
//! let rep = generate_replicate(&scenario, 0).unwrap();
//! let mut coordinator = Coordinator::in_process(site_nodes(&rep)).unwrap();
//! coordinator.standardize(StandardizationMode::Local).unwrap();
//! let config = BoostingConfig::new(scenario.p, FetchMode::Heuristic).with_target(Some(10));
//! let run = run_boosting(&mut coordinator, config).unwrap();
//! println!("{:?} after {} data calls", run.state.inclusion_order(), run.ledger.data_calls());
//! ```
//!
//! Examples (`cargo run --release --example <name>`):
//!
//! - `simulate_cohorts`: one replicate of a scenario written as site CSVs
//! - `distributed_boosting`: every fetch mode against pooled boosting
//! - `global_standardization`: aggregate fit equal to the pooled fit
//! - `tcp_sites`: sites on loopback sockets
//! - `protocol_frames`: wire messages and a disclosure refusal
//! - `meta_baseline`: univariable fixed-effects meta-analysis ranking
//! - `block_buffer_sweep`: data calls against transferred values
//! - `selection_metrics`: TPR, FPR and exact AUC
//! - `simulation_study`: a study over numbers of sites with plots
//! - `repro_tiny`: the end-to-end pipeline with a manifest

pub mod boost;
pub mod cli;
pub mod config;
pub mod coordinator;
pub mod eval;
pub mod ledger;
pub mod pipeline;
pub mod protocol;
pub mod results;
pub mod simgen;
pub mod site;
pub mod study;
