//! Three sites served over loopback TCP, one thread each, and a coordinator
//! that talks to them through the length-prefixed JSON protocol.

use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use fedboost::boost::FetchMode;
use fedboost::pipeline::{analyze, tcp_connections, AnalysisSettings};
use fedboost::protocol::DisclosurePolicy;
use fedboost::simgen::{generate_replicate, EffectSpec, Scenario, Structure};
use fedboost::site::{SiteNode, StandardizationMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario::new(
        "tcp",
        600,
        60,
        Structure::Grouped,
        EffectSpec {
            count: 4,
            ..EffectSpec::strong()
        },
    )
    .with_sites(3);
    let rep = generate_replicate(&scenario, 0)?;

    let mut addresses = Vec::new();
    for (l, data) in rep.sites.into_iter().enumerate() {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        addresses.push(listener.local_addr()?.to_string());
        let mut node = SiteNode::new(format!("site_{}", l + 1), data, DisclosurePolicy::default());
        // detached: the process exits when main returns
        thread::spawn(move || node.serve(listener));
    }
    println!("sites at {addresses:?}");

    let settings = AnalysisSettings {
        mode: FetchMode::Heuristic,
        nu: 0.1,
        steps: 1000,
        model_size: Some(8),
        standardize: StandardizationMode::Global,
    };
    let run = analyze(tcp_connections(&addresses, Duration::from_secs(5))?, &settings)?;
    println!(
        "selected {:?}",
        run.state.inclusion_order().iter().map(|j| j + 1).collect::<Vec<_>>()
    );
    for site in &run.ledger.per_site {
        println!(
            "  {}: {} frames, {} covariance values",
            site.site_id, site.frames, site.covariance_values
        );
    }
    Ok(())
}
