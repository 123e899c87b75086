//! Analysis, evaluation and the end-to-end `repro` driver behind the CLI.

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::time::Duration;

use log::{info, warn};
use ndarray::Array1;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::boost::{run_boosting, BoostError, BoostingConfig, BoostingRun, FetchMode};
use crate::config::RunConfig;
use crate::coordinator::{Coordinator, CoordinatorError, InProcessSite, SiteConnection, TcpSite};
use crate::eval::{
    auc, univariable_meta_baseline, write_csv, write_summary, EvalError, MetricsSummary, RunKey, RunRecord,
};
use crate::protocol::DisclosurePolicy;
use crate::results::{
    read_ledger, read_selection, write_ledger, write_selection, Selection, LEDGER_FILE, SELECTION_FILE,
};
use crate::simgen::{generate_replicate, read_truth, write_replicate, SimError, TruthVector};
use crate::site::{SiteDataset, SiteError, SiteNode, StandardizationMode};
use crate::study::standardize_test;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("site failure: {0}")]
    Site(String),
    #[error("numerical abort: {0}")]
    Numerical(String),
    #[error("{0}")]
    Other(String),
}

impl PipelineError {
    /// 2 config error, 3 site failure, 4 numerical abort, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Site(_) => 3,
            Self::Numerical(_) => 4,
            Self::Other(_) => 1,
        }
    }
}

impl From<BoostError> for PipelineError {
    fn from(e: BoostError) -> Self {
        match e {
            BoostError::Provider(_) => Self::Site(e.to_string()),
            BoostError::InvalidConfig(_) => Self::Config(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<CoordinatorError> for PipelineError {
    fn from(e: CoordinatorError) -> Self {
        match e {
            CoordinatorError::DegenerateColumn(_) => Self::Numerical(e.to_string()),
            _ => Self::Site(e.to_string()),
        }
    }
}

impl From<SimError> for PipelineError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidScenario(_) | SimError::LayoutInfeasible { .. } | SimError::IndivisibleSplit { .. } => {
                Self::Config(e.to_string())
            }
            _ => Self::Other(e.to_string()),
        }
    }
}

impl From<SiteError> for PipelineError {
    fn from(e: SiteError) -> Self {
        Self::Other(e.to_string())
    }
}

impl From<EvalError> for PipelineError {
    fn from(e: EvalError) -> Self {
        Self::Other(e.to_string())
    }
}

impl From<csv::Error> for PipelineError {
    fn from(e: csv::Error) -> Self {
        Self::Other(e.to_string())
    }
}

impl From<std::io::Error> for PipelineError {
    fn from(e: std::io::Error) -> Self {
        Self::Other(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisSettings {
    pub mode: FetchMode,
    pub nu: f64,
    pub steps: usize,
    pub model_size: Option<usize>,
    pub standardize: StandardizationMode,
}

/// Standardizes at the sites and runs boosting over the given connections.
pub fn analyze(
    connections: Vec<Box<dyn SiteConnection>>,
    settings: &AnalysisSettings,
) -> Result<BoostingRun, PipelineError> {
    let mut coordinator = Coordinator::connect(connections)?;
    coordinator.standardize(settings.standardize)?;
    let config = BoostingConfig::new(coordinator.p(), settings.mode)
        .with_nu(settings.nu)
        .with_max_steps(settings.steps)
        .with_target(settings.model_size);
    Ok(run_boosting(&mut coordinator, config)?)
}

pub fn write_analysis(dir: impl AsRef<Path>, run: &BoostingRun) -> Result<(), PipelineError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    write_selection(dir.join(SELECTION_FILE), &Selection::from_run(run))?;
    write_ledger(dir, &run.ledger)?;
    Ok(())
}

pub fn tcp_connections(addresses: &[String], wait: Duration) -> Result<Vec<Box<dyn SiteConnection>>, PipelineError> {
    addresses
        .iter()
        .enumerate()
        .map(|(l, addr)| {
            TcpSite::connect_with_retry(format!("site_{}", l + 1), addr, wait)
                .map(|s| Box::new(s) as Box<dyn SiteConnection>)
                .map_err(|e| PipelineError::Site(format!("{addr}: {e}")))
        })
        .collect()
}

pub fn in_process_connections(nodes: Vec<SiteNode>) -> Vec<Box<dyn SiteConnection>> {
    nodes
        .into_iter()
        .map(|n| Box::new(InProcessSite::new(n)) as Box<dyn SiteConnection>)
        .collect()
}

/// Scores one analysis directory against the truth and a held-out test set.
/// AUC is reported only for selections that carry coefficients.
pub fn evaluate_run(
    run_dir: &Path,
    key: RunKey,
    truth: &TruthVector,
    test: &SiteDataset,
    k: usize,
) -> Result<RunRecord, PipelineError> {
    let selection = read_selection(run_dir.join(SELECTION_FILE))?;
    let ledger = if run_dir.join(LEDGER_FILE).exists() {
        Some(read_ledger(run_dir)?)
    } else {
        None
    };
    let beta = selection.dense_beta(test.p());
    let auc_value = if beta.iter().any(|b| *b != 0.0) {
        let scores = standardize_test(&test.x().to_owned()).dot(&Array1::from(beta));
        let labels: Vec<bool> = test.y().iter().map(|y| *y == 1.0).collect();
        Some(auc(scores.as_slice().expect("contiguous"), &labels)?)
    } else {
        None
    };
    Ok(RunRecord::new(
        key,
        &selection.order,
        truth,
        k,
        auc_value,
        ledger.as_ref(),
    ))
}

/// Finds every directory under `results` holding a `selection.csv`. The
/// method is the directory name; a `rep_<r>` parent gives the replicate.
pub fn evaluate_results(
    results: &Path,
    truth: &TruthVector,
    test: &SiteDataset,
    k: usize,
) -> Result<Vec<RunRecord>, PipelineError> {
    let scenario = results
        .file_name()
        .map_or_else(|| "results".to_string(), |s| s.to_string_lossy().into_owned());
    let mut dirs = Vec::new();
    collect_run_dirs(results, &mut dirs)?;
    dirs.sort();
    if dirs.is_empty() {
        return Err(EvalError::EmptyResults.into());
    }
    dirs.iter()
        .map(|dir| {
            let method = dir
                .file_name()
                .map_or_else(|| scenario.clone(), |s| s.to_string_lossy().into_owned());
            let replicate = dir
                .parent()
                .and_then(|p| p.file_name())
                .and_then(|s| s.to_str()?.strip_prefix("rep_")?.parse().ok())
                .unwrap_or(0);
            let sites = if dir.join("traffic.csv").exists() {
                read_ledger(dir)?.per_site.len()
            } else {
                0
            };
            let key = RunKey {
                scenario: scenario.clone(),
                n: test.n(),
                sites,
                method,
                replicate,
            };
            evaluate_run(dir, key, truth, test, k)
        })
        .collect()
}

fn collect_run_dirs(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    if dir.join(SELECTION_FILE).is_file() {
        out.push(dir.to_path_buf());
    }
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_run_dirs(&path, out)?;
        }
    }
    Ok(())
}

/// How `repro` reaches its sites.
#[derive(Debug, Clone)]
pub enum Transport {
    InProcess,
    /// One `site` process per cohort, spawned from this executable.
    Sockets {
        site_exe: PathBuf,
    },
}

struct SiteProcesses {
    children: Vec<Child>,
    addresses: Vec<String>,
}

impl SiteProcesses {
    fn spawn(exe: &Path, data: &[PathBuf], host: &str, min_n: usize) -> Result<Self, PipelineError> {
        let mut procs = Self {
            children: Vec::new(),
            addresses: Vec::new(),
        };
        for (l, path) in data.iter().enumerate() {
            let mut child = Command::new(exe)
                .arg("site")
                .arg("--data")
                .arg(path)
                .args(["--listen", &format!("{host}:0")])
                .args(["--id", &format!("site_{}", l + 1)])
                .args(["--min-n", &min_n.to_string()])
                .stdout(Stdio::piped())
                .stderr(Stdio::inherit())
                .spawn()
                .map_err(|e| PipelineError::Site(format!("cannot start site process: {e}")))?;
            let mut line = String::new();
            let stdout = child.stdout.take().expect("piped stdout");
            procs.children.push(child);
            BufReader::new(stdout).read_line(&mut line)?;
            let addr = line
                .trim()
                .strip_prefix("listening on ")
                .ok_or_else(|| PipelineError::Site(format!("site {} did not start: `{}`", l + 1, line.trim())))?;
            procs.addresses.push(addr.to_string());
        }
        Ok(procs)
    }
}

impl Drop for SiteProcesses {
    fn drop(&mut self) {
        for child in &mut self.children {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

#[derive(Debug, Serialize)]
struct ManifestFile {
    path: String,
    bytes: u64,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    status: String,
    package: &'static str,
    version: &'static str,
    transport: &'static str,
    seed: u64,
    replicates: usize,
    replicate_seeds: Vec<String>,
    config: &'a RunConfig,
    files: Vec<ManifestFile>,
}

fn sha256_file(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_manifest(config: &RunConfig, transport: &Transport, status: String) -> Result<PathBuf, PipelineError> {
    let out = &config.out;
    let mut paths = Vec::new();
    collect_files(out, &mut paths)?;
    paths.sort();
    let files = paths
        .iter()
        .filter(|p| p.file_name().is_some_and(|n| n != "manifest.json"))
        .map(|p| {
            Ok(ManifestFile {
                path: p.strip_prefix(out).unwrap_or(p).to_string_lossy().replace('\\', "/"),
                bytes: std::fs::metadata(p)?.len(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<std::io::Result<Vec<_>>>()?;
    let manifest = Manifest {
        status,
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        transport: match transport {
            Transport::InProcess => "in-process",
            Transport::Sockets { .. } => "tcp",
        },
        seed: config.scenario.seed,
        replicates: config.scenario.replicates,
        replicate_seeds: (0..config.scenario.replicates)
            .map(|r| {
                format!(
                    "chacha8(seed={}, stream={r}; split stream={r}|2^63)",
                    config.scenario.seed
                )
            })
            .collect(),
        config,
        files,
    };
    let path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| PipelineError::Other(e.to_string()))?;
    std::fs::write(&path, text + "\n")?;
    Ok(path)
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

#[derive(Debug)]
pub struct ReproOutcome {
    pub records: Vec<RunRecord>,
    pub summary: Vec<MetricsSummary>,
    pub manifest: PathBuf,
}

/// Simulates every replicate, analyzes it with each configured method and
/// the baseline, evaluates, summarizes and writes a manifest. On failure the
/// manifest is still written with a `failed` status.
pub fn repro(config: &RunConfig, transport: &Transport) -> Result<ReproOutcome, PipelineError> {
    config.validate().map_err(PipelineError::Config)?;
    std::fs::create_dir_all(&config.out)?;
    match repro_inner(config, transport) {
        Ok((records, summary)) => {
            let manifest = write_manifest(config, transport, "complete".into())?;
            Ok(ReproOutcome {
                records,
                summary,
                manifest,
            })
        }
        Err(e) => {
            if let Err(m) = write_manifest(config, transport, format!("failed: {e}")) {
                warn!("could not write manifest: {m}");
            }
            Err(e)
        }
    }
}

fn repro_inner(
    config: &RunConfig,
    transport: &Transport,
) -> Result<(Vec<RunRecord>, Vec<MetricsSummary>), PipelineError> {
    let scenario = &config.scenario;
    let a = &config.analysis;
    let modes = a.fetch_modes().map_err(PipelineError::Config)?;
    let policy = DisclosurePolicy {
        min_site_n: config.sites.min_site_n,
    };
    let mut records = Vec::new();
    for r in 0..scenario.replicates as u64 {
        let data_dir = config.out.join("data").join(format!("rep_{r}"));
        let runs_dir = config.out.join("runs").join(format!("rep_{r}"));
        write_replicate(&data_dir, &generate_replicate(scenario, r)?)?;
        let site_files: Vec<PathBuf> = (1..=scenario.sites)
            .map(|l| data_dir.join(format!("site_{l}.csv")))
            .collect();
        let truth = read_truth(data_dir.join("truth.csv"))?;
        let test = SiteDataset::read_csv(data_dir.join("test.csv"))?;
        let datasets = site_files
            .iter()
            .map(SiteDataset::read_csv)
            .collect::<Result<Vec<_>, _>>()?;

        let processes = match transport {
            Transport::Sockets { site_exe } => Some(SiteProcesses::spawn(
                site_exe,
                &site_files,
                &config.sites.host,
                config.sites.min_site_n,
            )?),
            Transport::InProcess => None,
        };
        let mut methods: Vec<String> = Vec::new();
        for mode in &modes {
            let connections = match &processes {
                Some(p) => tcp_connections(&p.addresses, Duration::from_secs(config.sites.connect_timeout_secs))?,
                None => in_process_connections(
                    datasets
                        .iter()
                        .enumerate()
                        .map(|(l, d)| SiteNode::new(format!("site_{}", l + 1), d.clone(), policy))
                        .collect(),
                ),
            };
            let settings = AnalysisSettings {
                mode: *mode,
                nu: a.nu,
                steps: a.steps,
                model_size: Some(a.model_size),
                standardize: a.standardize,
            };
            let run = analyze(connections, &settings)?;
            info!(
                "replicate {r} {mode}: {} covariates, {} data calls, {} values",
                run.state.model_size(),
                run.ledger.data_calls(),
                run.ledger.values_transferred()
            );
            let label = mode.to_string();
            write_analysis(runs_dir.join(&label), &run)?;
            methods.push(label);
        }
        drop(processes);
        if a.baseline {
            let dir = runs_dir.join("meta");
            std::fs::create_dir_all(&dir)?;
            let ranking = univariable_meta_baseline(&datasets, a.model_size);
            write_selection(dir.join(SELECTION_FILE), &Selection::ranking(ranking))?;
            methods.push("meta".into());
        }
        for method in methods {
            let key = RunKey {
                scenario: scenario.name.clone(),
                n: scenario.n,
                sites: scenario.sites,
                method: method.clone(),
                replicate: r,
            };
            records.push(evaluate_run(&runs_dir.join(&method), key, &truth, &test, a.model_size)?);
        }
    }
    write_csv(config.out.join("runs.csv"), &records)?;
    let summary = write_summary(&records, &config.out)?;
    Ok((records, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(out: &Path) -> RunConfig {
        let text = format!(
            r#"
out = "{}"
[scenario]
name = "tiny"
n = 200
p = 40
structure = "grouped"
sites = 2
seed = 11
replicates = 2
[scenario.effects]
count = 4
size = 1.0
[analysis]
buffer = 5
"#,
            out.display()
        );
        RunConfig::from_toml(&text).unwrap()
    }

    #[test]
    fn in_process_repro_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny(&dir.path().join("out"));
        let outcome = repro(&config, &Transport::InProcess).unwrap();
        assert_eq!(outcome.records.len(), 8);
        let out = &config.out;
        for f in [
            "runs.csv",
            "metrics.csv",
            "manifest.json",
            "runs/rep_1/block-w5/selection.csv",
        ] {
            assert!(out.join(f).exists(), "{f}");
        }
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&outcome.manifest).unwrap()).unwrap();
        assert_eq!(manifest["status"], "complete");
        let files = manifest["files"].as_array().unwrap();
        assert!(files.iter().any(|f| f["path"] == "metrics.csv"));
        let entry = files.iter().find(|f| f["path"] == "runs.csv").unwrap();
        assert_eq!(entry["sha256"], sha256_file(&out.join("runs.csv")).unwrap());
    }

    #[test]
    fn evaluate_results_scans_directories() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny(&dir.path().join("out"));
        repro(&config, &Transport::InProcess).unwrap();
        let data = config.out.join("data/rep_0");
        let truth = read_truth(data.join("truth.csv")).unwrap();
        let test = SiteDataset::read_csv(data.join("test.csv")).unwrap();
        let records = evaluate_results(&config.out.join("runs/rep_0"), &truth, &test, 10).unwrap();
        assert_eq!(records.len(), 4);
        let meta = records.iter().find(|r| r.method == "meta").unwrap();
        assert!(meta.auc.is_none());
        let full = records.iter().find(|r| r.method == "full").unwrap();
        assert_eq!(full.sites, 2);
        assert!(full.auc.is_some());
    }

    #[test]
    fn site_refusal_maps_to_site_failure() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = tiny(&dir.path().join("out"));
        config.sites.min_site_n = 150;
        let err = repro(&config, &Transport::InProcess).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let manifest = std::fs::read_to_string(config.out.join("manifest.json")).unwrap();
        assert!(manifest.contains("\"status\": \"failed"));
    }
}
