mod common;

use common::oracle_replicate;
use fedboost::boost::{run_boosting, BoostingConfig, BoostingRun, FetchMode};
use fedboost::coordinator::Coordinator;
use fedboost::site::StandardizationMode;
use fedboost::study::site_nodes;

fn run(rep: &fedboost::simgen::Replicate, mode: FetchMode, target: Option<usize>) -> BoostingRun {
    let mut c = Coordinator::in_process(site_nodes(rep)).unwrap();
    c.standardize(StandardizationMode::Local).unwrap();
    let config = BoostingConfig::new(rep.x.ncols(), mode)
        .with_max_steps(80)
        .with_target(target);
    run_boosting(&mut c, config).unwrap()
}

fn same_fit(a: &BoostingRun, b: &BoostingRun) -> bool {
    a.state.inclusion_order() == b.state.inclusion_order() && a.state.coefficients() == b.state.coefficients()
}

#[test]
fn zero_buffer_is_the_heuristic() {
    for i in 0..8 {
        let rep = oracle_replicate(i, 4, 200, 60);
        let h = run(&rep, FetchMode::Heuristic, None);
        let b = run(&rep, FetchMode::BlockHeuristic { buffer: 0 }, None);
        assert!(same_fit(&h, &b), "dataset {i}");
    }
}

#[test]
fn full_buffer_is_full_mode() {
    for i in 0..8 {
        let rep = oracle_replicate(i, 4, 200, 60);
        let f = run(&rep, FetchMode::Full, Some(10));
        let b = run(&rep, FetchMode::BlockHeuristic { buffer: 60 }, Some(10));
        assert!(same_fit(&f, &b), "dataset {i}");
    }
}

#[test]
fn block_mode_fetches_ahead() {
    let rep = oracle_replicate(1, 5, 400, 120);
    let h = run(&rep, FetchMode::Heuristic, Some(10));
    let b = run(&rep, FetchMode::BlockHeuristic { buffer: 20 }, Some(10));
    assert!(b.ledger.data_calls() < h.ledger.data_calls());
    assert!(b.ledger.values_transferred() >= h.ledger.values_transferred());
}
