//! Simulation studies: every method on every replicate of a scenario, with
//! sites served in-process.

use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;
use thiserror::Error;

use crate::boost::reference::{boost_individual, standardize};
use crate::boost::{run_boosting, BoostError, BoostingConfig, FetchMode};
use crate::coordinator::{Coordinator, CoordinatorError};
use crate::eval::{auc, univariable_meta_baseline, EvalError, RunKey, RunRecord, SELECTION_SIZE};
use crate::ledger::CallLedger;
use crate::protocol::DisclosurePolicy;
use crate::simgen::{generate_replicate, Replicate, Scenario, SimError};
use crate::site::{SiteNode, StandardizationMode};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Boost(#[from] BoostError),
    #[error(transparent)]
    Coordinator(#[from] CoordinatorError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Aggregate boosting over the sites.
    Distributed {
        mode: FetchMode,
        standardization: StandardizationMode,
    },
    /// Individual-level boosting on the pooled data.
    Pooled,
    /// Top-k univariable fixed-effects meta-analysis.
    Meta,
}

impl Method {
    pub fn distributed(mode: FetchMode, standardization: StandardizationMode) -> Self {
        Self::Distributed { mode, standardization }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Distributed { mode, standardization } => {
                let s = match standardization {
                    StandardizationMode::Local => "local",
                    StandardizationMode::Global => "global",
                };
                format!("{mode}-{s}")
            }
            Self::Pooled => "pooled".into(),
            Self::Meta => "meta".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudySettings {
    pub nu: f64,
    pub max_steps: usize,
    /// Model size at which boosting stops; also the `k` of the metrics.
    pub k: usize,
}

impl Default for StudySettings {
    fn default() -> Self {
        Self {
            nu: 0.1,
            max_steps: 1000,
            k: SELECTION_SIZE,
        }
    }
}

/// What a method produced on one replicate.
#[derive(Debug, Clone)]
pub struct MethodResult {
    pub selected: Vec<usize>,
    pub beta: Option<Vec<f64>>,
    pub ledger: Option<CallLedger>,
}

pub fn site_nodes(replicate: &Replicate) -> Vec<SiteNode> {
    replicate
        .sites
        .iter()
        .enumerate()
        .map(|(l, d)| SiteNode::new(format!("site_{}", l + 1), d.clone(), DisclosurePolicy::default()))
        .collect()
}

pub fn run_method(replicate: &Replicate, method: Method, settings: &StudySettings) -> Result<MethodResult, StudyError> {
    let p = replicate.x.ncols();
    match method {
        Method::Distributed { mode, standardization } => {
            let mut coordinator = Coordinator::in_process(site_nodes(replicate))?;
            coordinator.standardize(standardization)?;
            let config = BoostingConfig::new(p, mode)
                .with_nu(settings.nu)
                .with_max_steps(settings.max_steps)
                .with_target(Some(settings.k));
            let run = run_boosting(&mut coordinator, config)?;
            Ok(MethodResult {
                selected: run.state.inclusion_order().to_vec(),
                beta: Some(run.state.coefficients()),
                ledger: Some(run.ledger),
            })
        }
        Method::Pooled => {
            let (x, y) = standardize(replicate.x.view(), replicate.y.view())?;
            let run = boost_individual(x.view(), y.view(), settings.nu, settings.max_steps, Some(settings.k));
            Ok(MethodResult {
                selected: run.inclusion_order,
                beta: Some(run.beta),
                ledger: None,
            })
        }
        Method::Meta => Ok(MethodResult {
            selected: univariable_meta_baseline(&replicate.sites, settings.k),
            beta: None,
            ledger: None,
        }),
    }
}

/// Centers and scales test columns with their own moments; constant
/// columns become zero.
pub fn standardize_test(x: &Array2<f64>) -> Array2<f64> {
    let n = x.nrows() as f64;
    let mut xs = x.clone();
    for mut col in xs.axis_iter_mut(Axis(1)) {
        let mean = col.sum() / n;
        col.mapv_inplace(|v| v - mean);
        let sd = (col.iter().map(|v| v * v).sum::<f64>() / (n - 1.0)).sqrt();
        if sd > 0.0 {
            col.mapv_inplace(|v| v / sd);
        }
    }
    xs
}

/// AUC of `x_test · β̂` on the held-out test set.
pub fn test_auc(replicate: &Replicate, beta: &[f64]) -> Result<f64, EvalError> {
    let scores = standardize_test(&replicate.test_x).dot(&Array1::from(beta.to_vec()));
    let labels: Vec<bool> = replicate.test_y.iter().map(|y| *y == 1.0).collect();
    auc(scores.as_slice().expect("contiguous"), &labels)
}

pub fn record(
    scenario: &Scenario,
    replicate: &Replicate,
    method: Method,
    result: &MethodResult,
    settings: &StudySettings,
) -> Result<RunRecord, StudyError> {
    let auc = result.beta.as_deref().map(|b| test_auc(replicate, b)).transpose()?;
    Ok(RunRecord::new(
        RunKey {
            scenario: scenario.name.clone(),
            n: scenario.n,
            sites: scenario.sites,
            method: method.label(),
            replicate: replicate.index,
        },
        &result.selected,
        &replicate.truth,
        settings.k,
        auc,
        result.ledger.as_ref(),
    ))
}

pub fn run_replicate(
    scenario: &Scenario,
    index: u64,
    methods: &[Method],
    settings: &StudySettings,
) -> Result<Vec<RunRecord>, StudyError> {
    let replicate = generate_replicate(scenario, index)?;
    methods
        .iter()
        .map(|&m| {
            let result = run_method(&replicate, m, settings)?;
            record(scenario, &replicate, m, &result, settings)
        })
        .collect()
}

/// All replicates of `scenario`, in parallel; records come back in
/// replicate order.
pub fn run_study(
    scenario: &Scenario,
    methods: &[Method],
    settings: &StudySettings,
) -> Result<Vec<RunRecord>, StudyError> {
    let per_replicate: Vec<Vec<RunRecord>> = (0..scenario.replicates as u64)
        .into_par_iter()
        .map(|r| run_replicate(scenario, r, methods, settings))
        .collect::<Result<_, _>>()?;
    Ok(per_replicate.into_iter().flatten().collect())
}
