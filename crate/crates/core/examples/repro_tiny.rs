//! The whole pipeline on a tiny configuration: simulate, analyze with every
//! fetch mode, run the baseline, evaluate, summarize and write a manifest.

use fedboost::config::RunConfig;
use fedboost::pipeline::{repro, Transport};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/tiny.toml");
    let mut config = RunConfig::load(path)?;
    config.out = std::env::temp_dir().join("fedboost-repro-tiny");
    let outcome = repro(&config, &Transport::InProcess)?;
    for s in &outcome.summary {
        println!(
            "{:<10} tpr {:.2} calls {:.1} values {:.0}",
            s.method, s.mean_tpr, s.mean_data_calls, s.mean_values
        );
    }
    println!("manifest: {}", outcome.manifest.display());
    Ok(())
}
