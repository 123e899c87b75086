use ndarray::{Array1, Axis};

use super::{SiteDataset, SiteError, StandardizationMode, StandardizationParams, StandardizedSite};
use crate::boost::UnivariableStats;

/// First-pass contribution to global moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSums {
    pub n: usize,
    pub sum_y: f64,
    pub sum_x: Vec<f64>,
}

/// Second-pass contribution: centered sums of squares around broadcast means.
#[derive(Debug, Clone, PartialEq)]
pub struct SsqSums {
    pub ssq_x: Vec<f64>,
    pub ssq_y: f64,
}

/// Centers and scales each column to `Σ x² = n_l − 1` and centers `y`,
/// using this site's own moments.
pub fn standardize_local(data: &SiteDataset) -> Result<StandardizedSite, SiteError> {
    let n = data.n();
    if n < 2 {
        return Err(SiteError::InvalidData("local standardization needs n >= 2".into()));
    }
    let means: Vec<f64> = data.x().sum_axis(Axis(0)).mapv(|s| s / n as f64).to_vec();
    let sds: Vec<f64> = data
        .x()
        .axis_iter(Axis(1))
        .zip(&means)
        .map(|(col, &m)| (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt())
        .collect();
    let y_mean = data.y().sum() / n as f64;
    rescale(data, StandardizationMode::Local, means, sds, y_mean)
}

pub fn global_moment_contrib(data: &SiteDataset) -> MomentSums {
    MomentSums {
        n: data.n(),
        sum_y: data.y().sum(),
        sum_x: data.x().sum_axis(Axis(0)).to_vec(),
    }
}

pub fn global_ssq_contrib(data: &SiteDataset, means: &[f64], y_mean: f64) -> Result<SsqSums, SiteError> {
    if means.len() != data.p() {
        return Err(SiteError::LengthMismatch {
            expected: data.p(),
            actual: means.len(),
        });
    }
    let ssq_x = data
        .x()
        .axis_iter(Axis(1))
        .zip(means)
        .map(|(col, &m)| col.iter().map(|v| (v - m).powi(2)).sum())
        .collect();
    let ssq_y = data.y().iter().map(|v| (v - y_mean).powi(2)).sum();
    Ok(SsqSums { ssq_x, ssq_y })
}

/// Applies consortium-wide means and standard deviations.
pub fn apply_global_standardization(
    data: &SiteDataset,
    means: &[f64],
    sds: &[f64],
    y_mean: f64,
) -> Result<StandardizedSite, SiteError> {
    for v in [means, sds] {
        if v.len() != data.p() {
            return Err(SiteError::LengthMismatch {
                expected: data.p(),
                actual: v.len(),
            });
        }
    }
    rescale(data, StandardizationMode::Global, means.to_vec(), sds.to_vec(), y_mean)
}

fn rescale(
    data: &SiteDataset,
    mode: StandardizationMode,
    means: Vec<f64>,
    sds: Vec<f64>,
    y_mean: f64,
) -> Result<StandardizedSite, SiteError> {
    if let Some(j) = sds.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(SiteError::DegenerateColumn(j));
    }
    let mut x = data.x().to_owned();
    for ((mut col, &m), &s) in x.axis_iter_mut(Axis(1)).zip(&means).zip(&sds) {
        col.mapv_inplace(|v| (v - m) / s);
    }
    let y: Array1<f64> = data.y().mapv(|v| v - y_mean);
    Ok(StandardizedSite {
        data: SiteDataset::with_names(x, y, data.names().to_vec())?,
        params: StandardizationParams {
            mode,
            means,
            sds,
            y_mean,
        },
    })
}

/// `a_j = Σ x_ij y_i` and `c_diag_j = Σ x_ij²` over this site.
pub fn univariable_stats(site: &StandardizedSite) -> UnivariableStats {
    let x = site.data.x();
    let y = site.data.y();
    UnivariableStats {
        a: x.axis_iter(Axis(1)).map(|c| c.dot(&y)).collect(),
        c_diag: x.axis_iter(Axis(1)).map(|c| c.dot(&c)).collect(),
    }
}

/// `Σ x_ij x_ik` for each requested pair.
pub fn covariance_block(
    site: &StandardizedSite,
    pairs: &[(usize, usize)],
) -> Result<Vec<(usize, usize, f64)>, SiteError> {
    let x = site.data.x();
    let p = x.ncols();
    pairs
        .iter()
        .map(|&(j, k)| {
            for index in [j, k] {
                if index >= p {
                    return Err(SiteError::IndexOutOfRange { index, p });
                }
            }
            Ok((j, k, x.column(j).dot(&x.column(k))))
        })
        .collect()
}
