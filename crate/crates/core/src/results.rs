//! Files written by one analysis: `selection.csv`, `ledger.csv` and
//! `traffic.csv`. Covariate indices in these files are one-based.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boost::BoostingRun;
use crate::ledger::{CallLedger, SiteTraffic};

pub const SELECTION_FILE: &str = "selection.csv";
pub const LEDGER_FILE: &str = "ledger.csv";
pub const TRAFFIC_FILE: &str = "traffic.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub rank: usize,
    pub index: usize,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CallKind {
    Setup,
    Univariable,
    Covariance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub call: usize,
    pub kind: CallKind,
    pub values: usize,
}

/// Covariates in inclusion order with their final coefficients. `beta`
/// entries for unselected covariates are zero and omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub order: Vec<usize>,
    pub beta: Vec<(usize, f64)>,
}

impl Selection {
    pub fn from_run(run: &BoostingRun) -> Self {
        Self {
            order: run.state.inclusion_order().to_vec(),
            beta: run
                .state
                .inclusion_order()
                .iter()
                .map(|&j| (j, run.state.beta(j)))
                .collect(),
        }
    }

    /// Ranking without coefficients, as produced by the meta baseline.
    pub fn ranking(order: Vec<usize>) -> Self {
        Self {
            beta: order.iter().map(|&j| (j, 0.0)).collect(),
            order,
        }
    }

    pub fn dense_beta(&self, p: usize) -> Vec<f64> {
        let mut beta = vec![0.0; p];
        for &(j, b) in &self.beta {
            if j < p {
                beta[j] = b;
            }
        }
        beta
    }
}

pub fn write_selection(path: impl AsRef<Path>, selection: &Selection) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    for (rank, &(j, beta)) in selection.beta.iter().enumerate() {
        w.serialize(SelectionRow {
            rank: rank + 1,
            index: j + 1,
            beta,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_selection(path: impl AsRef<Path>) -> Result<Selection, csv::Error> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows: Vec<SelectionRow> = r.deserialize().collect::<Result<_, _>>()?;
    rows.sort_by_key(|row| row.rank);
    Ok(Selection {
        order: rows.iter().map(|row| row.index - 1).collect(),
        beta: rows.iter().map(|row| (row.index - 1, row.beta)).collect(),
    })
}

pub fn ledger_rows(ledger: &CallLedger) -> Vec<LedgerRow> {
    let kinds = std::iter::repeat_n((CallKind::Setup, 0), ledger.setup_calls)
        .chain(std::iter::repeat_n(
            (CallKind::Univariable, 0),
            ledger.univariable_calls,
        ))
        .chain(ledger.covariance_calls.iter().map(|&v| (CallKind::Covariance, v)));
    kinds
        .enumerate()
        .map(|(i, (kind, values))| LedgerRow {
            call: i + 1,
            kind,
            values,
        })
        .collect()
}

pub fn write_ledger(dir: impl AsRef<Path>, ledger: &CallLedger) -> Result<(), csv::Error> {
    let dir = dir.as_ref();
    let mut w = csv::Writer::from_path(dir.join(LEDGER_FILE))?;
    for row in ledger_rows(ledger) {
        w.serialize(row)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join(TRAFFIC_FILE))?;
    for site in &ledger.per_site {
        w.serialize(site)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `ledger.csv` and, when present, `traffic.csv`.
pub fn read_ledger(dir: impl AsRef<Path>) -> Result<CallLedger, csv::Error> {
    let dir = dir.as_ref();
    let mut ledger = CallLedger::default();
    let mut r = csv::Reader::from_path(dir.join(LEDGER_FILE))?;
    for row in r.deserialize::<LedgerRow>() {
        let row = row?;
        match row.kind {
            CallKind::Setup => ledger.setup_calls += 1,
            CallKind::Univariable => ledger.univariable_calls += 1,
            CallKind::Covariance => ledger.covariance_calls.push(row.values),
        }
    }
    let traffic = dir.join(TRAFFIC_FILE);
    if traffic.exists() {
        let mut r = csv::Reader::from_path(traffic)?;
        ledger.per_site = r.deserialize::<SiteTraffic>().collect::<Result<_, _>>()?;
    }
    Ok(ledger)
}
