use super::CoordinatorError;
use crate::boost::{CovPair, UnivariableStats};

/// Sums per-site univariable statistics, in site order.
pub fn pool_univariable(
    per_site: &[(String, UnivariableStats)],
    expected_sites: usize,
    p: usize,
) -> Result<UnivariableStats, CoordinatorError> {
    if per_site.len() != expected_sites {
        return Err(CoordinatorError::MissingSite {
            expected: expected_sites,
            received: per_site.len(),
        });
    }
    let mut pooled = UnivariableStats {
        a: vec![0.0; p],
        c_diag: vec![0.0; p],
    };
    for (site, stats) in per_site {
        for len in [stats.a.len(), stats.c_diag.len()] {
            if len != p {
                return Err(CoordinatorError::LengthMismatch {
                    site: site.clone(),
                    expected: p,
                    actual: len,
                });
            }
        }
        for j in 0..p {
            pooled.a[j] += stats.a[j];
            pooled.c_diag[j] += stats.c_diag[j];
        }
    }
    Ok(pooled)
}

/// Sums per-site covariance blocks into values aligned with `pairs`.
///
/// Each site must answer exactly the requested pairs in the requested order.
pub fn pool_covariances(
    pairs: &[CovPair],
    per_site: &[(String, Vec<(usize, usize, f64)>)],
    expected_sites: usize,
) -> Result<Vec<f64>, CoordinatorError> {
    if per_site.len() != expected_sites {
        return Err(CoordinatorError::MissingSite {
            expected: expected_sites,
            received: per_site.len(),
        });
    }
    let mut pooled = vec![0.0; pairs.len()];
    for (site, values) in per_site {
        if values.len() != pairs.len() {
            return Err(CoordinatorError::LengthMismatch {
                site: site.clone(),
                expected: pairs.len(),
                actual: values.len(),
            });
        }
        for ((total, pair), &(j, k, v)) in pooled.iter_mut().zip(pairs).zip(values) {
            if pair.as_tuple() != (j, k) {
                return Err(CoordinatorError::PairMismatch {
                    site: site.clone(),
                    expected: pair.as_tuple(),
                    found: (j, k),
                });
            }
            *total += v;
        }
    }
    Ok(pooled)
}
