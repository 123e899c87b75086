//! Subcommands of the `fedboost` binary.

use std::io::Write;
use std::net::TcpListener;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use crate::boost::FetchMode;
use crate::config::RunConfig;
use crate::eval::{summarize, write_csv, write_summary};
use crate::pipeline::{
    analyze, evaluate_results, repro, tcp_connections, write_analysis, AnalysisSettings, PipelineError, Transport,
};
use crate::protocol::DisclosurePolicy;
use crate::simgen::{generate_replicate, read_truth, write_replicate, Scenario};
use crate::site::{SiteDataset, SiteNode, StandardizationMode};
use crate::study::{run_method, Method, StudySettings};

#[derive(Debug, Parser)]
#[command(
    name = "fedboost",
    version,
    about = "Componentwise boosting over aggregated statistics from distributed sites"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one replicate: site_<l>.csv per cohort, truth.csv, test.csv.
    Simulate(SimulateArgs),
    /// Serve one cohort over TCP.
    Site(SiteArgs),
    /// Run boosting against running sites.
    Analyze(AnalyzeArgs),
    /// Score analysis outputs against the truth and a test set.
    Evaluate(EvaluateArgs),
    /// Data calls and transferred values per fetch mode.
    BenchCalls(BenchArgs),
    /// Simulate, analyze, evaluate and summarize a whole configuration.
    Repro(ReproArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub replicate: u64,
}

#[derive(Debug, Args)]
pub struct SiteArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Use port 0 for an ephemeral port; the bound address is printed.
    #[arg(long)]
    pub listen: String,
    #[arg(long, default_value = "site")]
    pub id: String,
    #[arg(long, default_value_t = DisclosurePolicy::default().min_site_n)]
    pub min_n: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Full,
    Heuristic,
    Block,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StandardizeArg {
    Local,
    Global,
}

impl From<StandardizeArg> for StandardizationMode {
    fn from(s: StandardizeArg) -> Self {
        match s {
            StandardizeArg::Local => Self::Local,
            StandardizeArg::Global => Self::Global,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Comma-separated site addresses.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sites: Vec<String>,
    #[arg(long, value_enum, default_value = "heuristic")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 20)]
    pub buffer: usize,
    #[arg(long, default_value_t = 0.1)]
    pub nu: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 10)]
    pub model_size: usize,
    #[arg(long, value_enum, default_value = "local")]
    pub standardize: StandardizeArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Seconds to keep retrying site connections.
    #[arg(long, default_value_t = 10)]
    pub wait: u64,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Buffer sizes for the block heuristic.
    #[arg(long, value_delimiter = ',', default_value = "0,5,10,20,50")]
    pub buffers: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Stop at this model size instead of running all steps.
    #[arg(long)]
    pub model_size: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Serve sites in this process instead of spawning site processes.
    #[arg(long)]
    pub in_process: bool,
}

pub fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Site(a) => site(a),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Evaluate(a) => evaluate(a),
        Command::BenchCalls(a) => bench_calls(a),
        Command::Repro(a) => repro_cmd(a),
    }
}

fn load_scenario(path: &PathBuf) -> Result<Scenario, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    Scenario::from_toml(&text).map_err(|e| PipelineError::Config(e.to_string()))
}

fn simulate(a: SimulateArgs) -> Result<(), PipelineError> {
    let scenario = load_scenario(&a.scenario)?;
    let replicate = generate_replicate(&scenario, a.replicate)?;
    write_replicate(&a.out, &replicate)?;
    println!(
        "wrote {} sites, truth and test set for `{}` replicate {} to {}",
        scenario.sites,
        scenario.name,
        a.replicate,
        a.out.display()
    );
    Ok(())
}

fn site(a: SiteArgs) -> Result<(), PipelineError> {
    let data =
        SiteDataset::read_csv(&a.data).map_err(|e| PipelineError::Config(format!("{}: {e}", a.data.display())))?;
    let listener = TcpListener::bind(&a.listen).map_err(|e| PipelineError::Site(format!("bind {}: {e}", a.listen)))?;
    let addr = listener.local_addr()?;
    let mut node = SiteNode::new(a.id, data, DisclosurePolicy { min_site_n: a.min_n });
    let mut stdout = std::io::stdout();
    writeln!(stdout, "listening on {addr}")?;
    stdout.flush()?;
    node.serve(listener)?;
    Ok(())
}

fn analyze_cmd(a: AnalyzeArgs) -> Result<(), PipelineError> {
    let mode = match a.mode {
        ModeArg::Full => FetchMode::Full,
        ModeArg::Heuristic => FetchMode::Heuristic,
        ModeArg::Block => FetchMode::BlockHeuristic { buffer: a.buffer },
    };
    let settings = AnalysisSettings {
        mode,
        nu: a.nu,
        steps: a.steps,
        model_size: Some(a.model_size),
        standardize: a.standardize.into(),
    };
    let connections = tcp_connections(&a.sites, Duration::from_secs(a.wait))?;
    let run = analyze(connections, &settings)?;
    write_analysis(&a.out, &run)?;
    println!(
        "{mode}: {} covariates after {} steps ({:?}), {} data calls, {} covariance values",
        run.state.model_size(),
        run.path.len(),
        run.stop,
        run.ledger.data_calls(),
        run.ledger.values_transferred()
    );
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<(), PipelineError> {
    let truth = read_truth(&a.truth)?;
    let test = SiteDataset::read_csv(&a.test)?;
    let records = evaluate_results(&a.results, &truth, &test, a.k)?;
    std::fs::create_dir_all(&a.out)?;
    write_csv(a.out.join("runs.csv"), &records)?;
    for s in write_summary(&records, &a.out)? {
        println!(
            "{:<24} tpr {:.3}  fpr {:.4}  auc {}",
            s.method,
            s.mean_tpr,
            s.mean_fpr,
            fmt_opt(s.mean_auc)
        );
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.3}"))
}

#[derive(Debug, Serialize)]
struct BenchRow {
    method: String,
    replicate: u64,
    model_size: usize,
    data_calls: usize,
    covariance_calls: usize,
    values: usize,
}

fn bench_calls(a: BenchArgs) -> Result<(), PipelineError> {
    let scenario = load_scenario(&a.scenario)?;
    let mut modes = vec![FetchMode::Full, FetchMode::Heuristic];
    modes.extend(a.buffers.iter().map(|&buffer| FetchMode::BlockHeuristic { buffer }));
    let settings = StudySettings {
        max_steps: a.steps,
        k: a.model_size.unwrap_or(usize::MAX),
        ..StudySettings::default()
    };
    let mut rows = Vec::new();
    for r in 0..scenario.replicates as u64 {
        let replicate = generate_replicate(&scenario, r)?;
        for &mode in &modes {
            let method = Method::distributed(mode, StandardizationMode::Local);
            let result =
                run_method(&replicate, method, &settings).map_err(|e| PipelineError::Numerical(e.to_string()))?;
            let ledger = result.ledger.expect("distributed runs keep a ledger");
            rows.push(BenchRow {
                method: mode.to_string(),
                replicate: r,
                model_size: result.selected.len(),
                data_calls: ledger.data_calls(),
                covariance_calls: ledger.covariance_call_count(),
                values: ledger.values_transferred(),
            });
        }
        info!("bench replicate {r} done");
    }
    if let Some(parent) = a.out.parent() {
        std::fs::create_dir_all(parent)?;
    }
    write_csv(&a.out, &rows)?;
    println!("{:<12} {:>8} {:>11} {:>10}", "mode", "size", "data calls", "values");
    for mode in &modes {
        let name = mode.to_string();
        let of: Vec<&BenchRow> = rows.iter().filter(|r| r.method == name).collect();
        let mean = |f: fn(&BenchRow) -> usize| of.iter().map(|r| f(r) as f64).sum::<f64>() / of.len() as f64;
        println!(
            "{name:<12} {:>8.1} {:>11.2} {:>10.1}",
            mean(|r| r.model_size),
            mean(|r| r.data_calls),
            mean(|r| r.values)
        );
    }
    Ok(())
}

fn repro_cmd(a: ReproArgs) -> Result<(), PipelineError> {
    let config = RunConfig::load(&a.config).map_err(PipelineError::Config)?;
    let transport = if a.in_process {
        Transport::InProcess
    } else {
        Transport::Sockets {
            site_exe: std::env::current_exe()?,
        }
    };
    let outcome = repro(&config, &transport)?;
    for s in summarize(&outcome.records) {
        println!(
            "{:<14} L={:<3} tpr {:.3}  fpr {:.4}  auc {}  calls {:.2}",
            s.method,
            s.sites,
            s.mean_tpr,
            s.mean_fpr,
            fmt_opt(s.mean_auc),
            s.mean_data_calls
        );
    }
    println!("manifest: {}", outcome.manifest.display());
    Ok(())
}
