use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{copy_probability, Scenario, SimError};
use crate::site::SiteDataset;

const SPLIT_STREAM: u64 = 1 << 63;

/// True coefficients of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthVector {
    pub beta: Vec<f64>,
}

impl TruthVector {
    pub fn effect_indices(&self) -> Vec<usize> {
        self.beta
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn is_effect(&self, j: usize) -> bool {
        self.beta.get(j).is_some_and(|b| *b != 0.0)
    }
}

/// Generator for replicate `r` (or its cohort split when `split` is set).
pub fn replicate_rng(seed: u64, replicate: u64, split: bool) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(if split { replicate | SPLIT_STREAM } else { replicate });
    rng
}

fn ternary(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-1i8..=1) as f64
}

/// `n × p` matrix with entries in {−1, 0, 1}. Rows are independent Markov
/// chains along the covariate index.
pub fn gen_covariates(scenario: &Scenario, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let (n, p) = (scenario.n, scenario.p);
    let rho: Vec<f64> = (0..p).map(|j| copy_probability(scenario.agreement(j))).collect();
    let mut x = Array2::<f64>::zeros((n, p));
    for mut row in x.axis_iter_mut(Axis(0)) {
        row[0] = ternary(rng);
        for j in 1..p {
            row[j] = if rng.random::<f64>() < rho[j] {
                row[j - 1]
            } else {
                ternary(rng)
            };
        }
    }
    x
}

/// Effects sit at the first covariate of consecutive groups. With two per
/// group the second sits at offset 3 and only every other group is used,
/// keeping at least two null covariates between any two effects.
pub fn place_effects(scenario: &Scenario) -> Result<TruthVector, SimError> {
    let spec = &scenario.effects;
    let gs = scenario.group_size;
    let infeasible = || SimError::LayoutInfeasible {
        count: spec.count,
        per_group: spec.per_group,
        p: scenario.p,
    };
    let positions: Vec<usize> = match spec.per_group {
        1 => (0..spec.count).map(|g| g * gs).collect(),
        2 => {
            if gs < 4 {
                return Err(infeasible());
            }
            (0..spec.count).map(|e| (e / 2) * 2 * gs + (e % 2) * 3).collect()
        }
        _ => return Err(infeasible()),
    };
    if positions.last().is_some_and(|&last| last >= scenario.p) {
        return Err(infeasible());
    }
    if positions.windows(2).any(|w| w[1] - w[0] < 3) {
        return Err(infeasible());
    }
    let mut beta = vec![0.0; scenario.p];
    for j in positions {
        beta[j] = spec.size;
    }
    Ok(TruthVector { beta })
}

pub fn expit(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

/// Bernoulli outcomes with success probability `expit(x·β)`.
pub fn gen_outcome(x: &Array2<f64>, truth: &TruthVector, rng: &mut ChaCha8Rng) -> Array1<f64> {
    let beta = Array1::from(truth.beta.clone());
    let eta = x.dot(&beta);
    eta.mapv(|e| (rng.random::<f64>() < expit(e)) as u8 as f64)
}

/// Random partition of the rows into `sites` blocks of equal size.
pub fn split_cohorts(
    x: &Array2<f64>,
    y: &Array1<f64>,
    sites: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<SiteDataset>, SimError> {
    let n = x.nrows();
    if sites == 0 || !n.is_multiple_of(sites) {
        return Err(SimError::IndivisibleSplit { n, sites });
    }
    if sites == 1 {
        return Ok(vec![SiteDataset::new(x.clone(), y.clone())?]);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
        .chunks(n / sites)
        .map(|rows| Ok(SiteDataset::new(x.select(Axis(0), rows), y.select(Axis(0), rows))?))
        .collect()
}

/// One simulated consortium plus an independent test set of the same size.
#[derive(Debug, Clone)]
pub struct Replicate {
    pub index: u64,
    pub truth: TruthVector,
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub test_x: Array2<f64>,
    pub test_y: Array1<f64>,
    pub sites: Vec<SiteDataset>,
}

pub fn generate_replicate(scenario: &Scenario, replicate: u64) -> Result<Replicate, SimError> {
    scenario.validate()?;
    let truth = place_effects(scenario)?;
    let mut rng = replicate_rng(scenario.seed, replicate, false);
    let x = gen_covariates(scenario, &mut rng);
    let y = gen_outcome(&x, &truth, &mut rng);
    let test_x = gen_covariates(scenario, &mut rng);
    let test_y = gen_outcome(&test_x, &truth, &mut rng);
    let mut split_rng = replicate_rng(scenario.seed, replicate, true);
    let sites = split_cohorts(&x, &y, scenario.sites, &mut split_rng)?;
    Ok(Replicate {
        index: replicate,
        truth,
        x,
        y,
        test_x,
        test_y,
        sites,
    })
}

#[derive(Serialize, Deserialize)]
struct TruthRow {
    index: usize,
    beta: f64,
}

/// Writes `index,beta` rows with one-based indices.
pub fn write_truth(path: impl AsRef<Path>, truth: &TruthVector) -> Result<(), SimError> {
    let mut w = csv::Writer::from_path(path)?;
    for (j, &beta) in truth.beta.iter().enumerate() {
        w.serialize(TruthRow { index: j + 1, beta })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_truth(path: impl AsRef<Path>) -> Result<TruthVector, SimError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut beta = Vec::new();
    for row in r.deserialize::<TruthRow>() {
        let row = row?;
        if row.index != beta.len() + 1 {
            return Err(SimError::InvalidScenario(format!(
                "truth rows out of order at index {}",
                row.index
            )));
        }
        beta.push(row.beta);
    }
    Ok(TruthVector { beta })
}

/// Writes `site_<l>.csv` for each cohort, `truth.csv` and `test.csv`.
pub fn write_replicate(dir: impl AsRef<Path>, replicate: &Replicate) -> Result<(), SimError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    for (l, site) in replicate.sites.iter().enumerate() {
        site.write_csv(dir.join(format!("site_{}.csv", l + 1)))?;
    }
    write_truth(dir.join("truth.csv"), &replicate.truth)?;
    SiteDataset::new(replicate.test_x.clone(), replicate.test_y.clone())?.write_csv(dir.join("test.csv"))?;
    Ok(())
}
