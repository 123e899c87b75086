mod common;

use common::{center_scale, naive_boost, oracle_replicate, rel_close, stack_locally_standardized};
use fedboost::boost::{run_boosting, BoostingConfig, FetchMode};
use fedboost::coordinator::Coordinator;
use fedboost::site::StandardizationMode;
use fedboost::study::site_nodes;

fn distributed(
    rep: &fedboost::simgen::Replicate,
    standardization: StandardizationMode,
    steps: usize,
) -> (Vec<usize>, Vec<f64>) {
    let mut c = Coordinator::in_process(site_nodes(rep)).unwrap();
    c.standardize(standardization).unwrap();
    let run = run_boosting(
        &mut c,
        BoostingConfig::new(rep.x.ncols(), FetchMode::Full)
            .with_max_steps(steps)
            .with_target(None),
    )
    .unwrap();
    (run.state.inclusion_order().to_vec(), run.state.coefficients())
}

fn assert_same(label: &str, got: &(Vec<usize>, Vec<f64>), want: &(Vec<usize>, Vec<f64>)) {
    assert_eq!(got.0, want.0, "{label}: inclusion order");
    for (j, (a, b)) in got.1.iter().zip(&want.1).enumerate() {
        assert!(rel_close(*a, *b, 1e-10), "{label}: beta_{j} {a} vs {b}");
    }
}

#[test]
fn global_standardization_matches_naive_pooled_boosting() {
    for i in 0..6 {
        for sites in [1, 2, 5] {
            let rep = oracle_replicate(i, sites, 200, 60);
            let (x, y) = center_scale(&rep.x, &rep.y);
            assert_same(
                &format!("dataset {i}, L={sites}"),
                &distributed(&rep, StandardizationMode::Global, 50),
                &naive_boost(&x, &y, 0.1, 50),
            );
        }
    }
}

#[test]
fn local_standardization_matches_stacked_site_standardized_data() {
    for i in 0..6 {
        for sites in [2, 5] {
            let rep = oracle_replicate(i, sites, 200, 60);
            let (x, y) = stack_locally_standardized(&rep);
            assert_same(
                &format!("dataset {i}, L={sites}"),
                &distributed(&rep, StandardizationMode::Local, 50),
                &naive_boost(&x, &y, 0.1, 50),
            );
        }
    }
}

#[test]
fn one_site_local_equals_global() {
    let rep = oracle_replicate(3, 1, 200, 60);
    let local = distributed(&rep, StandardizationMode::Local, 40);
    let global = distributed(&rep, StandardizationMode::Global, 40);
    assert_same("L=1", &local, &global);
}
