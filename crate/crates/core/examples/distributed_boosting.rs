//! Boosting over five in-process sites with each fetch mode, compared with
//! boosting on the pooled individual-level data.

use fedboost::boost::reference::{boost_individual, standardize};
use fedboost::boost::{run_boosting, BoostingConfig, FetchMode};
use fedboost::coordinator::Coordinator;
use fedboost::simgen::{generate_replicate, EffectSpec, Scenario, Structure};
use fedboost::site::StandardizationMode;
use fedboost::study::site_nodes;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario::desk(1000, Structure::Moderate, EffectSpec::strong()).with_sites(5);
    let rep = generate_replicate(&scenario, 0)?;
    let p = scenario.p;

    let (x, y) = standardize(rep.x.view(), rep.y.view())?;
    let pooled = boost_individual(x.view(), y.view(), 0.1, 1000, Some(10));
    println!("pooled      {:?}", one_based(&pooled.inclusion_order));

    for mode in [
        FetchMode::Full,
        FetchMode::Heuristic,
        FetchMode::BlockHeuristic { buffer: 20 },
    ] {
        let mut coordinator = Coordinator::in_process(site_nodes(&rep))?;
        coordinator.standardize(StandardizationMode::Local)?;
        let run = run_boosting(&mut coordinator, BoostingConfig::new(p, mode).with_target(Some(10)))?;
        println!(
            "{:<11} {:?}  calls={} values={}",
            mode.to_string(),
            one_based(run.state.inclusion_order()),
            run.ledger.data_calls(),
            run.ledger.values_transferred()
        );
    }
    println!("true effects {:?}", one_based(&rep.truth.effect_indices()));
    Ok(())
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|j| j + 1).collect()
}
