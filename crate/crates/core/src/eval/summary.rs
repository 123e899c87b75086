use std::collections::BTreeMap;
use std::path::Path;

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::ledger::CallLedger;
use crate::simgen::TruthVector;

/// One method applied to one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub n: usize,
    pub sites: usize,
    pub method: String,
    pub replicate: u64,
    pub effects: usize,
    pub true_positives: usize,
    pub tpr: f64,
    pub fpr: f64,
    pub auc: Option<f64>,
    pub data_calls: usize,
    pub covariance_calls: usize,
    pub values: usize,
    /// One-based indices of the first `k` selected covariates, `;`-separated.
    pub selected: String,
    /// Values carried by each covariance call, `;`-separated.
    pub call_sizes: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RunKey {
    pub scenario: String,
    pub n: usize,
    pub sites: usize,
    pub method: String,
    pub replicate: u64,
}

impl RunRecord {
    pub fn new(
        key: RunKey,
        selected: &[usize],
        truth: &TruthVector,
        k: usize,
        auc: Option<f64>,
        ledger: Option<&CallLedger>,
    ) -> Self {
        let first: Vec<usize> = selected.iter().take(k).copied().collect();
        let effects = truth.effect_indices().len();
        let true_positives = first.iter().filter(|j| truth.is_effect(**j)).count();
        let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        Self {
            scenario: key.scenario,
            n: key.n,
            sites: key.sites,
            method: key.method,
            replicate: key.replicate,
            effects,
            true_positives,
            tpr: if effects == 0 {
                0.0
            } else {
                true_positives as f64 / effects as f64
            },
            fpr: (first.len() - true_positives) as f64 / k as f64,
            auc,
            data_calls: ledger.map_or(0, |l| l.data_calls()),
            covariance_calls: ledger.map_or(0, |l| l.covariance_call_count()),
            values: ledger.map_or(0, |l| l.values_transferred()),
            selected: join(&mut first.iter().map(|j| j + 1)),
            call_sizes: join(&mut ledger.into_iter().flat_map(|l| l.covariance_calls.iter().copied())),
        }
    }

    /// Zero-based selected indices.
    pub fn selected_indices(&self) -> Vec<usize> {
        parse_list(&self.selected).into_iter().map(|j| j - 1).collect()
    }

    pub fn call_sizes(&self) -> Vec<usize> {
        parse_list(&self.call_sizes)
    }
}

fn parse_list(s: &str) -> Vec<usize> {
    s.split(';')
        .filter(|t| !t.is_empty())
        .filter_map(|t| t.parse().ok())
        .collect()
}

/// Means over the replicates of one scenario × site count × method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub scenario: String,
    pub n: usize,
    pub sites: usize,
    pub method: String,
    pub replicates: usize,
    pub mean_tpr: f64,
    pub mean_fpr: f64,
    pub mean_auc: Option<f64>,
    pub mean_data_calls: f64,
    pub mean_covariance_calls: f64,
    pub mean_values: f64,
}

pub fn summarize(records: &[RunRecord]) -> Vec<MetricsSummary> {
    let mut groups: BTreeMap<(String, usize, usize, String), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.scenario.clone(), r.n, r.sites, r.method.clone()))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((scenario, n, sites, method), rs)| {
            let m = rs.len() as f64;
            let mean = |f: &dyn Fn(&RunRecord) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / m;
            let aucs: Vec<f64> = rs.iter().filter_map(|r| r.auc).collect();
            MetricsSummary {
                scenario,
                n,
                sites,
                method,
                replicates: rs.len(),
                mean_tpr: mean(&|r| r.tpr),
                mean_fpr: mean(&|r| r.fpr),
                mean_auc: (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64),
                mean_data_calls: mean(&|r| r.data_calls as f64),
                mean_covariance_calls: mean(&|r| r.covariance_calls as f64),
                mean_values: mean(&|r| r.values as f64),
            }
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_runs(path: impl AsRef<Path>) -> Result<Vec<RunRecord>, EvalError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Reads `runs.csv` from `results`, writes `metrics.csv` and plots to `out`.
pub fn summarize_dir(results: impl AsRef<Path>, out: impl AsRef<Path>) -> Result<Vec<MetricsSummary>, EvalError> {
    let records = read_runs(results.as_ref().join("runs.csv"))?;
    write_summary(&records, out)
}

pub fn write_summary(records: &[RunRecord], out: impl AsRef<Path>) -> Result<Vec<MetricsSummary>, EvalError> {
    let out = out.as_ref();
    std::fs::create_dir_all(out)?;
    let summary = summarize(records);
    write_csv(out.join("metrics.csv"), &summary)?;
    plot_selection_vs_sites(&summary, out.join("selection_vs_sites.svg"))?;
    plot_calls_vs_values(records, out.join("calls_vs_values.svg"))?;
    Ok(summary)
}

fn plot_err<E: std::fmt::Display>(e: E) -> EvalError {
    EvalError::Plot(e.to_string())
}

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

/// Mean TPR against the number of sites, one line per scenario and method.
pub fn plot_selection_vs_sites(summary: &[MetricsSummary], path: impl AsRef<Path>) -> Result<(), EvalError> {
    let root = SVGBackend::new(path.as_ref(), (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let max_sites = summary.iter().map(|s| s.sites).max().unwrap_or(1).max(2) as f64;
    let mut chart = ChartBuilder::on(&root)
        .caption("Selection of effect covariates", ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(0.0..max_sites + 1.0, 0.0..1.05)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("sites")
        .y_desc("mean TPR")
        .draw()
        .map_err(plot_err)?;
    let mut lines: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for s in summary {
        lines
            .entry((s.scenario.clone(), s.method.clone()))
            .or_default()
            .push((s.sites as f64, s.mean_tpr));
    }
    for (i, ((scenario, method), mut pts)) in lines.into_iter().enumerate() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(format!("{scenario} {method}"))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
        chart
            .draw_series(pts.into_iter().map(|p| Circle::new(p, 3, color.filled())))
            .map_err(plot_err)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Each run as a point (covariance calls, values), plus the mean
/// cumulative values after each call index.
pub fn plot_calls_vs_values(records: &[RunRecord], path: impl AsRef<Path>) -> Result<(), EvalError> {
    let root = SVGBackend::new(path.as_ref(), (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let max_calls = records.iter().map(|r| r.covariance_calls).max().unwrap_or(1).max(1) as f64;
    let max_values = records.iter().map(|r| r.values).max().unwrap_or(1).max(1) as f64;
    let mut chart = ChartBuilder::on(&root)
        .caption("Covariance calls and transferred values", ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(0.0..max_calls + 1.0, 0.0..max_values * 1.05)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("covariance calls")
        .y_desc("values")
        .draw()
        .map_err(plot_err)?;
    let mut methods: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        methods.entry(&r.method).or_default().push(r);
    }
    for (i, (method, rs)) in methods.into_iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(
                rs.iter()
                    .map(|r| Circle::new((r.covariance_calls as f64, r.values as f64), 3, color.mix(0.4).filled())),
            )
            .map_err(plot_err)?
            .label(method.to_string())
            .legend(move |(x, y)| Circle::new((x + 10, y), 3, color.filled()));
        let mut sums: Vec<(f64, usize)> = Vec::new();
        for r in &rs {
            let mut cumulative = 0.0;
            for (c, size) in r.call_sizes().into_iter().enumerate() {
                cumulative += size as f64;
                if sums.len() <= c {
                    sums.push((0.0, 0));
                }
                sums[c].0 += cumulative;
                sums[c].1 += 1;
            }
        }
        let means: Vec<(f64, f64)> = sums
            .into_iter()
            .enumerate()
            .map(|(c, (s, k))| ((c + 1) as f64, s / k as f64))
            .collect();
        chart
            .draw_series(LineSeries::new(means, color.stroke_width(2)))
            .map_err(plot_err)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(method: &str, replicate: u64, selected: &[usize], calls: &[usize]) -> RunRecord {
        let mut beta = vec![0.0; 250];
        for j in (0..50).step_by(5) {
            beta[j] = 1.0;
        }
        let ledger = CallLedger {
            univariable_calls: 1,
            covariance_calls: calls.to_vec(),
            ..Default::default()
        };
        RunRecord::new(
            RunKey {
                scenario: "s".into(),
                n: 500,
                sites: 5,
                method: method.into(),
                replicate,
            },
            selected,
            &TruthVector { beta },
            10,
            Some(0.8),
            Some(&ledger),
        )
    }

    #[test]
    fn single_replicate_summary_equals_record() {
        let r = record("full", 0, &[0, 5, 7, 9], &[249, 248]);
        let s = &summarize(std::slice::from_ref(&r))[0];
        assert_eq!(s.mean_tpr, r.tpr);
        assert_eq!(s.mean_fpr, 0.2);
        assert_eq!(s.mean_data_calls, 3.0);
        assert_eq!(s.mean_values, 497.0);
        assert_eq!(r.selected_indices(), vec![0, 5, 7, 9]);
    }

    #[test]
    fn full_mode_accounting_summary() {
        let calls: Vec<usize> = (1..=10).map(|k| 250 - k).collect();
        let r = record("full", 0, &[0], &calls);
        let s = &summarize(&[r])[0];
        assert_eq!(s.mean_data_calls, 11.0);
        assert_eq!(s.mean_values, 2445.0);
    }

    #[test]
    fn writes_metrics_and_plots() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![
            record("full", 0, &[0, 5], &[249, 248]),
            record("heuristic", 0, &[0, 5], &[5, 3]),
            record("heuristic", 1, &[0, 1], &[4]),
        ];
        write_csv(dir.path().join("runs.csv"), &records).unwrap();
        assert_eq!(read_runs(dir.path().join("runs.csv")).unwrap(), records);
        let summary = summarize_dir(dir.path(), dir.path().join("out")).unwrap();
        assert_eq!(summary.len(), 2);
        for f in ["metrics.csv", "selection_vs_sites.svg", "calls_vs_values.svg"] {
            assert!(dir.path().join("out").join(f).exists(), "{f}");
        }
    }
}
