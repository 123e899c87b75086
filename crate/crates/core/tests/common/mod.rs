#![allow(dead_code)]

use fedboost::simgen::{generate_replicate, EffectSpec, Replicate, Scenario, Structure};
use ndarray::{Array1, Array2, Axis};

/// Random small dataset `i` of the oracle suites: alternating structure,
/// five strong effects, `sites` cohorts.
pub fn oracle_replicate(i: u64, sites: usize, n: usize, p: usize) -> Replicate {
    let structure = if i.is_multiple_of(2) {
        Structure::Moderate
    } else {
        Structure::Grouped
    };
    let effects = EffectSpec {
        count: 5,
        ..EffectSpec::strong()
    };
    let scenario = Scenario::new(format!("oracle-{i}"), n, p, structure, effects)
        .with_sites(sites)
        .with_seed(1000 + i);
    generate_replicate(&scenario, 0).expect("valid scenario")
}

/// Column-wise `(x − mean) / sd` with divisor `n − 1`, and `y − mean(y)`.
pub fn center_scale(x: &Array2<f64>, y: &Array1<f64>) -> (Array2<f64>, Array1<f64>) {
    let n = x.nrows() as f64;
    let mut xs = x.clone();
    for mut col in xs.axis_iter_mut(Axis(1)) {
        let m = col.mean().unwrap();
        let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        col.mapv_inplace(|v| (v - m) / sd);
    }
    let ym = y.mean().unwrap();
    (xs, y.mapv(|v| v - ym))
}

/// Each site standardized on its own, rows stacked.
pub fn stack_locally_standardized(rep: &Replicate) -> (Array2<f64>, Array1<f64>) {
    let parts: Vec<_> = rep
        .sites
        .iter()
        .map(|s| center_scale(&s.x().to_owned(), &s.y().to_owned()))
        .collect();
    let xs: Vec<_> = parts.iter().map(|(x, _)| x.view()).collect();
    let ys: Vec<_> = parts.iter().map(|(_, y)| y.view()).collect();
    (
        ndarray::concatenate(Axis(0), &xs).unwrap(),
        ndarray::concatenate(Axis(0), &ys).unwrap(),
    )
}

/// Dense componentwise least-squares boosting straight from the residuals:
/// score `x_j'r`, largest squared score wins (lowest index on ties), step
/// `ν x_j'r / x_j'x_j`.
pub fn naive_boost(x: &Array2<f64>, y: &Array1<f64>, nu: f64, steps: usize) -> (Vec<usize>, Vec<f64>) {
    let p = x.ncols();
    let mut beta = vec![0.0; p];
    let mut order = Vec::new();
    let diag: Vec<f64> = (0..p).map(|j| x.column(j).dot(&x.column(j))).collect();
    for _ in 0..steps {
        let resid = y - &x.dot(&Array1::from(beta.clone()));
        let scores: Vec<f64> = (0..p).map(|j| x.column(j).dot(&resid)).collect();
        let mut best = 0;
        for j in 1..p {
            if scores[j] * scores[j] > scores[best] * scores[best] {
                best = j;
            }
        }
        if !order.contains(&best) {
            order.push(best);
        }
        beta[best] += nu * scores[best] / diag[best];
    }
    (order, beta)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}
