//! Data calls against transferred covariance values as the block buffer
//! grows, with the heuristic (w = 0) and full mode at the extremes.

use fedboost::boost::FetchMode;
use fedboost::simgen::{generate_replicate, EffectSpec, Scenario, Structure};
use fedboost::site::StandardizationMode;
use fedboost::study::{run_method, Method, StudySettings};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario::desk(500, Structure::Grouped, EffectSpec::strong()).with_sites(5);
    let reps: Vec<_> = (0..10)
        .map(|r| generate_replicate(&scenario, r))
        .collect::<Result<_, _>>()?;
    let settings = StudySettings::default();

    let mut modes = vec![FetchMode::Heuristic];
    modes.extend([5, 10, 20, 50, 100].map(|buffer| FetchMode::BlockHeuristic { buffer }));
    modes.push(FetchMode::Full);

    println!("{:<10} {:>10} {:>10}", "mode", "calls", "values");
    for mode in modes {
        let (mut calls, mut values) = (0.0, 0.0);
        for rep in &reps {
            let result = run_method(rep, Method::distributed(mode, StandardizationMode::Local), &settings)?;
            let ledger = result.ledger.expect("distributed");
            calls += ledger.data_calls() as f64;
            values += ledger.values_transferred() as f64;
        }
        let k = reps.len() as f64;
        println!("{:<10} {:>10.2} {:>10.1}", mode.to_string(), calls / k, values / k);
    }
    Ok(())
}
