use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::plan::{compute_scores, plan_fetch, scoring_set, select_update, step_candidates, Update};
use super::{AggregateCache, BoostError, BoostingConfig, BoostingState, CovPair, FetchMode};
use crate::ledger::{CallLedger, SiteTraffic};

/// Pooled univariable statistics: `a_j = Σ x_ij y_i` and `c_diag_j = Σ x_ij²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariableStats {
    pub a: Vec<f64>,
    pub c_diag: Vec<f64>,
}

#[derive(Debug, Clone, Error)]
pub struct ProviderError {
    pub site: Option<String>,
    pub message: String,
}

impl ProviderError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            site: None,
            message: message.into(),
        }
    }

    pub fn at_site(site: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            site: Some(site.into()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ProviderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.site {
            Some(site) => write!(f, "site {site}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Source of pooled aggregates. Each method call is one logical data call.
pub trait AggregateProvider {
    fn univariable_stats(&mut self) -> Result<UnivariableStats, ProviderError>;

    /// Pooled `C_jk` for each pair, in request order.
    fn covariances(&mut self, pairs: &[CovPair]) -> Result<Vec<f64>, ProviderError>;

    /// Standardization rounds issued before boosting started.
    fn setup_calls(&self) -> usize {
        0
    }

    fn site_traffic(&self) -> Vec<SiteTraffic> {
        Vec::new()
    }
}

impl<P: AggregateProvider + ?Sized> AggregateProvider for &mut P {
    fn univariable_stats(&mut self) -> Result<UnivariableStats, ProviderError> {
        (**self).univariable_stats()
    }

    fn covariances(&mut self, pairs: &[CovPair]) -> Result<Vec<f64>, ProviderError> {
        (**self).covariances(pairs)
    }

    fn setup_calls(&self) -> usize {
        (**self).setup_calls()
    }

    fn site_traffic(&self) -> Vec<SiteTraffic> {
        (**self).site_traffic()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    MaxSteps,
    /// The next step would have included one covariate too many.
    TargetModelSize,
}

/// What happened in one applied step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub scored: Vec<usize>,
    pub scores: Vec<f64>,
    pub update: Update,
    pub new_inclusion: bool,
    /// Covariance values fetched before scoring; zero when no call was made.
    pub fetched: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Applied(StepRecord),
    Stopped(StopReason),
}

/// Compact per-step trace kept in the final result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathEntry {
    pub covariate: usize,
    pub delta: f64,
    pub fetched: usize,
}

#[derive(Debug, Clone)]
pub struct BoostingRun {
    pub state: BoostingState,
    pub ledger: CallLedger,
    pub path: Vec<PathEntry>,
    pub stop: StopReason,
}

/// Step-by-step driver over an [`AggregateProvider`].
pub struct Booster<P: AggregateProvider> {
    provider: P,
    config: BoostingConfig,
    cache: AggregateCache,
    state: BoostingState,
    ledger: CallLedger,
    path: Vec<PathEntry>,
    stopped: Option<StopReason>,
}

impl<P: AggregateProvider> Booster<P> {
    /// Validates the configuration and performs the univariable data call.
    pub fn start(mut provider: P, config: BoostingConfig) -> Result<Self, BoostError> {
        config.validate()?;
        let stats = provider.univariable_stats()?;
        if stats.a.len() != config.p {
            return Err(BoostError::LengthMismatch {
                expected: config.p,
                actual: stats.a.len(),
            });
        }
        if let Some(j) = stats.a.iter().position(|v| !v.is_finite()) {
            return Err(BoostError::NonFiniteScore { j });
        }
        let cache = AggregateCache::new(stats.a, stats.c_diag)?;
        let state = BoostingState::new(cache.a_values().to_vec());
        let ledger = CallLedger {
            univariable_calls: 1,
            ..Default::default()
        };
        Ok(Self {
            provider,
            config,
            cache,
            state,
            ledger,
            path: Vec::new(),
            stopped: None,
        })
    }

    pub fn state(&self) -> &BoostingState {
        &self.state
    }

    pub fn cache(&self) -> &AggregateCache {
        &self.cache
    }

    pub fn ledger(&self) -> &CallLedger {
        &self.ledger
    }

    pub fn step(&mut self) -> Result<StepOutcome, BoostError> {
        if let Some(reason) = self.stopped {
            return Ok(StepOutcome::Stopped(reason));
        }
        if self.state.step() >= self.config.max_steps {
            self.stopped = Some(StopReason::MaxSteps);
            return Ok(StepOutcome::Stopped(StopReason::MaxSteps));
        }
        let mode = self.config.mode;
        if mode != FetchMode::Full && self.state.model_size() > 0 {
            // The heuristic threshold needs current scores of included covariates.
            let included = self.state.inclusion_order().to_vec();
            let scores = compute_scores(&self.cache, &self.state, &included)?;
            self.state.refresh_scores(&included, &scores);
        }

        let candidates = step_candidates(&mode, &self.state);
        let plan = plan_fetch(&mode, &self.state, &self.cache, &candidates);
        let fetched = plan.len();
        if !plan.is_empty() {
            let values = self.provider.covariances(&plan.pairs)?;
            if values.len() != plan.len() {
                return Err(BoostError::LengthMismatch {
                    expected: plan.len(),
                    actual: values.len(),
                });
            }
            for (pair, value) in plan.pairs.iter().zip(values) {
                self.cache.insert(*pair, value);
            }
            self.ledger.record_covariance_call(fetched);
        }

        let scored = scoring_set(&self.state, &self.cache, &candidates);
        let scores = compute_scores(&self.cache, &self.state, &scored)?;
        if let Some(pos) = scores.iter().position(|s| !s.is_finite()) {
            return Err(BoostError::NonFiniteScore { j: scored[pos] });
        }
        self.state.record_scores(&scored, &scores);
        let update = select_update(&scored, &scores, &self.cache, self.config.nu)?;

        let new_inclusion = !self.state.is_included(update.covariate);
        if let Some(target) = self.config.target_model_size {
            if new_inclusion && self.state.model_size() >= target {
                self.stopped = Some(StopReason::TargetModelSize);
                return Ok(StepOutcome::Stopped(StopReason::TargetModelSize));
            }
        }
        self.state.apply_update(update.covariate, update.delta);
        self.path.push(PathEntry {
            covariate: update.covariate,
            delta: update.delta,
            fetched,
        });
        Ok(StepOutcome::Applied(StepRecord {
            step: self.state.step(),
            scored,
            scores,
            update,
            new_inclusion,
            fetched,
        }))
    }

    pub fn finish(self) -> BoostingRun {
        let mut ledger = self.ledger;
        ledger.setup_calls = self.provider.setup_calls();
        ledger.per_site = self.provider.site_traffic();
        BoostingRun {
            state: self.state,
            ledger,
            path: self.path,
            stop: self.stopped.unwrap_or(StopReason::MaxSteps),
        }
    }
}

/// Runs boosting to completion: one univariable call, then up to
/// `max_steps` steps, each preceded by a covariance call when the cache
/// cannot score the step's candidates.
pub fn run_boosting<P: AggregateProvider>(provider: P, config: BoostingConfig) -> Result<BoostingRun, BoostError> {
    let mut booster = Booster::start(provider, config)?;
    while let StepOutcome::Applied(_) = booster.step()? {}
    Ok(booster.finish())
}
