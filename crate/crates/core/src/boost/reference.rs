//! In-memory boosting on individual-level data.
//!
//! This follows the textbook formulation: an explicit offset `η = Xβ`,
//! residual scores `S = X'(y − η)`, and the least-squares step
//! `ν · S_j / (n − 1)` for covariates scaled to `x_j'x_j = n − 1`. It shares
//! no code with the aggregate path and serves as its oracle, as well as the
//! pooled-individual-data comparator in simulations.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, ShapeBuilder};

use super::run::{AggregateProvider, ProviderError, StopReason, UnivariableStats};
use super::{BoostError, CovPair, Update};

/// Centers `y` and centers/scales every column of `x` to `Σ x² = n − 1`.
pub fn standardize(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<(Array2<f64>, Array1<f64>), BoostError> {
    let n = x.nrows();
    if n < 2 {
        return Err(BoostError::InvalidConfig("need at least two rows".into()));
    }
    let mut xs = x.to_owned();
    for (j, mut col) in xs.axis_iter_mut(Axis(1)).enumerate() {
        let mean = col.sum() / n as f64;
        col.mapv_inplace(|v| v - mean);
        let ssq = col.iter().map(|v| v * v).sum::<f64>();
        let sd = (ssq / (n - 1) as f64).sqrt();
        if !(sd > 0.0) {
            return Err(BoostError::DegenerateColumn(j));
        }
        col.mapv_inplace(|v| v / sd);
    }
    let y_mean = y.sum() / n as f64;
    Ok((xs, y.mapv(|v| v - y_mean)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRun {
    pub beta: Vec<f64>,
    pub inclusion_order: Vec<usize>,
    pub path: Vec<Update>,
    pub stop: StopReason,
}

/// Componentwise boosting on standardized individual-level data, with the
/// same shrinkage, step limit and model-size stop as the aggregate engine.
pub fn boost_individual(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    nu: f64,
    max_steps: usize,
    target_model_size: Option<usize>,
) -> ReferenceRun {
    let (n, p) = x.dim();
    let denom = (n - 1) as f64;
    let mut beta = vec![0.0; p];
    let mut included = vec![false; p];
    let mut inclusion_order = Vec::new();
    let mut path = Vec::new();
    let mut stop = StopReason::MaxSteps;

    for _ in 0..max_steps {
        let mut eta = Array1::<f64>::zeros(n);
        for &k in &inclusion_order {
            eta.scaled_add(beta[k], &x.column(k));
        }
        let residual = &y - &eta;
        let scores = x.t().dot(&residual);

        let mut best = 0;
        for j in 1..p {
            if scores[j] * scores[j] > scores[best] * scores[best] {
                best = j;
            }
        }
        if !included[best] && target_model_size.is_some_and(|t| inclusion_order.len() >= t) {
            stop = StopReason::TargetModelSize;
            break;
        }
        let delta = nu * scores[best] / denom;
        beta[best] += delta;
        if !included[best] {
            included[best] = true;
            inclusion_order.push(best);
        }
        path.push(Update { covariate: best, delta });
    }
    ReferenceRun {
        beta,
        inclusion_order,
        path,
        stop,
    }
}

/// Serves aggregates straight from an in-memory standardized matrix.
///
/// Useful for single-machine analyses and tests; a consortium of sites goes
/// through [`crate::coordinator::Coordinator`] instead.
#[derive(Debug, Clone)]
pub struct MatrixProvider {
    x: Array2<f64>,
    y: Array1<f64>,
}

impl MatrixProvider {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Self {
        // Column-major so that column dot products are contiguous.
        let mut xf = Array2::<f64>::zeros(x.raw_dim().f());
        xf.assign(&x);
        Self { x: xf, y }
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }
}

impl AggregateProvider for MatrixProvider {
    fn univariable_stats(&mut self) -> Result<UnivariableStats, ProviderError> {
        let a = self.x.t().dot(&self.y).to_vec();
        let c_diag = self.x.axis_iter(Axis(1)).map(|c| c.dot(&c)).collect();
        Ok(UnivariableStats { a, c_diag })
    }

    fn covariances(&mut self, pairs: &[CovPair]) -> Result<Vec<f64>, ProviderError> {
        let p = self.x.ncols();
        pairs
            .iter()
            .map(|pair| {
                if pair.hi() >= p {
                    return Err(ProviderError::new(format!("pair {:?} out of range", pair.as_tuple())));
                }
                Ok(self.x.column(pair.lo()).dot(&self.x.column(pair.hi())))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn standardize_scales_to_n_minus_one() {
        let x = array![[1.0, 0.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, 1.0]];
        let y = array![1.0, 0.0, 1.0, 0.0];
        let (xs, ys) = standardize(x.view(), y.view()).unwrap();
        for col in xs.columns() {
            assert!(col.sum().abs() < 1e-12);
            assert!((col.dot(&col) - 3.0).abs() < 1e-12);
        }
        assert_eq!(ys, array![0.5, -0.5, 0.5, -0.5]);
    }

    #[test]
    fn standardize_rejects_constant_column() {
        let x = array![[1.0, 0.0], [1.0, 1.0], [1.0, -1.0]];
        let y = array![1.0, 0.0, 1.0];
        assert!(matches!(
            standardize(x.view(), y.view()),
            Err(BoostError::DegenerateColumn(0))
        ));
    }

    #[test]
    fn single_column_converges_geometrically() {
        // y equals the standardized column: each step removes ν of the residual.
        let x = array![[1.0], [-1.0], [1.0], [-1.0]];
        let (xs, _) = standardize(x.view(), array![0.0, 0.0, 0.0, 0.0].view()).unwrap();
        let y = xs.column(0).to_owned();
        let run = boost_individual(xs.view(), y.view(), 0.5, 3, None);
        assert!((run.beta[0] - (1.0 - 0.5f64.powi(3))).abs() < 1e-12);
        assert_eq!(run.inclusion_order, vec![0]);
    }

    #[test]
    fn target_zero_keeps_beta_at_zero() {
        let x = array![[1.0, 0.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, 1.0]];
        let y = array![1.0, 0.0, 1.0, 0.0];
        let (xs, ys) = standardize(x.view(), y.view()).unwrap();
        let run = boost_individual(xs.view(), ys.view(), 0.1, 10, Some(0));
        assert_eq!(run.beta, vec![0.0, 0.0]);
        assert_eq!(run.stop, StopReason::TargetModelSize);
    }
}
