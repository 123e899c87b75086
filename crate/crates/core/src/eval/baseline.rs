use log::debug;
use ndarray::ArrayView1;
use statrs::function::erf::erfc;

use crate::site::SiteDataset;

const MAX_ITERATIONS: usize = 25;
const TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_se: f64,
}

/// Logistic regression of `y` on an intercept and `x` by IRLS. Returns
/// `None` on separation, a singular information matrix, or no convergence.
pub fn fit_univariable_logistic(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> Option<LogisticFit> {
    let (mut b0, mut b1) = (0.0f64, 0.0f64);
    for _ in 0..MAX_ITERATIONS {
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&xi, &yi) in x.iter().zip(y.iter()) {
            let mu = 1.0 / (1.0 + (-(b0 + b1 * xi)).exp());
            let w = mu * (1.0 - mu);
            g0 += yi - mu;
            g1 += (yi - mu) * xi;
            h00 += w;
            h01 += w * xi;
            h11 += w * xi * xi;
        }
        let det = h00 * h11 - h01 * h01;
        if !(det.is_finite() && det > 1e-12 * (h00 * h11).max(f64::MIN_POSITIVE)) {
            return None;
        }
        let d0 = (h11 * g0 - h01 * g1) / det;
        let d1 = (h00 * g1 - h01 * g0) / det;
        b0 += d0;
        b1 += d1;
        if !(b0.is_finite() && b1.is_finite()) {
            return None;
        }
        if d0.abs().max(d1.abs()) < TOLERANCE {
            let (mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0);
            for &xi in x.iter() {
                let mu = 1.0 / (1.0 + (-(b0 + b1 * xi)).exp());
                let w = mu * (1.0 - mu);
                h00 += w;
                h01 += w * xi;
                h11 += w * xi * xi;
            }
            let det = h00 * h11 - h01 * h01;
            if !(det > 0.0) {
                return None;
            }
            return Some(LogisticFit {
                intercept: b0,
                slope: b1,
                slope_se: (h00 / det).sqrt(),
            });
        }
    }
    None
}

/// Fixed-effects pooled slope of one covariate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaEstimate {
    pub covariate: usize,
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    pub p_value: f64,
    pub sites_used: usize,
}

/// Inverse-variance pooling; `None` when no estimate is available.
pub fn fixed_effects(estimates: &[(f64, f64)]) -> Option<(f64, f64)> {
    if estimates.is_empty() {
        return None;
    }
    let (mut sw, mut swb) = (0.0, 0.0);
    for &(b, se) in estimates {
        let w = 1.0 / (se * se);
        sw += w;
        swb += w * b;
    }
    Some((swb / sw, 1.0 / sw.sqrt()))
}

pub fn wald_p_value(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Per-covariate pooled univariable logistic slopes across sites.
pub fn meta_estimates(sites: &[SiteDataset]) -> Vec<MetaEstimate> {
    let p = sites.first().map_or(0, |s| s.p());
    (0..p)
        .map(|j| {
            let fits: Vec<(f64, f64)> = sites
                .iter()
                .filter_map(|s| fit_univariable_logistic(s.x().column(j), s.y()))
                .filter(|f| f.slope_se.is_finite() && f.slope_se > 0.0)
                .map(|f| (f.slope, f.slope_se))
                .collect();
            match fixed_effects(&fits) {
                Some((estimate, se)) => {
                    let z = estimate / se;
                    MetaEstimate {
                        covariate: j,
                        estimate,
                        se,
                        z,
                        p_value: wald_p_value(z),
                        sites_used: fits.len(),
                    }
                }
                None => {
                    debug!("covariate {j}: no site could fit a logistic model; p set to 1");
                    MetaEstimate {
                        covariate: j,
                        estimate: 0.0,
                        se: f64::INFINITY,
                        z: 0.0,
                        p_value: 1.0,
                        sites_used: 0,
                    }
                }
            }
        })
        .collect()
}

/// The `k` covariates with the smallest pooled p-values. Ties (including
/// p-values that underflow to zero) are broken by larger `|z|`, then index.
pub fn univariable_meta_baseline(sites: &[SiteDataset], k: usize) -> Vec<usize> {
    let mut estimates = meta_estimates(sites);
    estimates.sort_by(|a, b| {
        a.p_value
            .total_cmp(&b.p_value)
            .then(b.z.abs().total_cmp(&a.z.abs()))
            .then(a.covariate.cmp(&b.covariate))
    });
    estimates.into_iter().take(k).map(|e| e.covariate).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1, Array2};

    #[test]
    fn logistic_fit_matches_closed_form() {
        // 2×2 table: x=0 → 3/10 events, x=1 → 6/10 events
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (x, events) in [(0.0, 3), (1.0, 6)] {
            for i in 0..10 {
                xs.push(x);
                ys.push(if i < events { 1.0 } else { 0.0 });
            }
        }
        let fit = fit_univariable_logistic(Array1::from(xs).view(), Array1::from(ys).view()).unwrap();
        let logit = |p: f64| (p / (1.0 - p)).ln();
        assert!((fit.intercept - logit(0.3)).abs() < 1e-10);
        assert!((fit.slope - (logit(0.6) - logit(0.3))).abs() < 1e-10);
        let se = (1.0 / 3.0 + 1.0 / 7.0 + 1.0 / 6.0 + 1.0 / 4.0f64).sqrt();
        assert!((fit.slope_se - se).abs() < 1e-8);
    }

    #[test]
    fn separation_fails() {
        let x = array![-1.0, -1.0, 1.0, 1.0];
        let y = array![0.0, 0.0, 1.0, 1.0];
        assert!(fit_univariable_logistic(x.view(), y.view()).is_none());
    }

    #[test]
    fn pooling_one_study_is_identity() {
        let (b, se) = fixed_effects(&[(0.7, 0.2)]).unwrap();
        assert!((b - 0.7).abs() < 1e-15 && (se - 0.2).abs() < 1e-15);
        let (b, se) = fixed_effects(&[(1.0, 1.0), (3.0, 1.0)]).unwrap();
        assert!((b - 2.0).abs() < 1e-15 && (se - 0.5f64.sqrt()).abs() < 1e-15);
        let p = wald_p_value(1.959963984540054);
        assert!((p - 0.05).abs() < 1e-10, "{p}");
    }

    fn site(seed: u64, n: usize) -> SiteDataset {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, 6), |_| rng.random_range(-1i8..=1) as f64);
        let y = Array1::from_shape_fn(n, |i| {
            let eta = 1.5 * x[[i, 2]];
            (rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp())) as u8 as f64
        });
        SiteDataset::new(x, y).unwrap()
    }

    #[test]
    fn strong_effect_ranks_first() {
        let sites = vec![site(1, 200), site(2, 200)];
        assert_eq!(univariable_meta_baseline(&sites, 3)[0], 2);
    }

    #[test]
    fn ranking_is_scale_invariant() {
        let sites = vec![site(3, 150), site(4, 150)];
        let scaled: Vec<SiteDataset> = sites
            .iter()
            .map(|s| {
                let mut x = s.x().to_owned();
                for (j, mut col) in x.columns_mut().into_iter().enumerate() {
                    col *= 0.5 + j as f64;
                }
                SiteDataset::new(x, s.y().to_owned()).unwrap()
            })
            .collect();
        assert_eq!(
            univariable_meta_baseline(&sites, 6),
            univariable_meta_baseline(&scaled, 6)
        );
    }
}
