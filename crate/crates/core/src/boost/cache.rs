use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::BoostError;

/// Unordered pair of distinct covariate indices, stored as `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CovPair {
    lo: usize,
    hi: usize,
}

impl CovPair {
    /// Returns `None` for diagonal pairs, which are never requested.
    pub fn new(j: usize, k: usize) -> Option<Self> {
        match j.cmp(&k) {
            std::cmp::Ordering::Less => Some(Self { lo: j, hi: k }),
            std::cmp::Ordering::Greater => Some(Self { lo: k, hi: j }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn as_tuple(&self) -> (usize, usize) {
        (self.lo, self.hi)
    }
}

/// Pooled aggregates known to the analysis side.
///
/// `A` and the diagonal are complete from construction on. Off-diagonal
/// entries are added as they are fetched and are never removed.
#[derive(Debug, Clone)]
pub struct AggregateCache {
    a: Vec<f64>,
    c_diag: Vec<f64>,
    off_diag: HashMap<CovPair, f64>,
}

impl AggregateCache {
    pub fn new(a: Vec<f64>, c_diag: Vec<f64>) -> Result<Self, BoostError> {
        if a.len() != c_diag.len() {
            return Err(BoostError::LengthMismatch {
                expected: a.len(),
                actual: c_diag.len(),
            });
        }
        if let Some((j, &value)) = c_diag.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(BoostError::DegenerateDiagonal { j, value });
        }
        Ok(Self {
            a,
            c_diag,
            off_diag: HashMap::new(),
        })
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self, j: usize) -> f64 {
        self.a[j]
    }

    pub fn a_values(&self) -> &[f64] {
        &self.a
    }

    pub fn c_diag(&self, j: usize) -> f64 {
        self.c_diag[j]
    }

    /// `C_jk`, answering the diagonal from the univariable stats.
    pub fn covariance(&self, j: usize, k: usize) -> Option<f64> {
        match CovPair::new(j, k) {
            None => self.c_diag.get(j).copied(),
            Some(pair) => self.off_diag.get(&pair).copied(),
        }
    }

    pub fn is_available(&self, j: usize, k: usize) -> bool {
        match CovPair::new(j, k) {
            None => j < self.p(),
            Some(pair) => self.off_diag.contains_key(&pair),
        }
    }

    pub fn contains(&self, pair: &CovPair) -> bool {
        self.off_diag.contains_key(pair)
    }

    /// Inserts a pooled value. A pair already present keeps its first value.
    pub fn insert(&mut self, pair: CovPair, value: f64) {
        self.off_diag.entry(pair).or_insert(value);
    }

    /// Number of distinct off-diagonal pairs held.
    pub fn off_diagonal_len(&self) -> usize {
        self.off_diag.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_is_unordered() {
        assert_eq!(CovPair::new(3, 1), CovPair::new(1, 3));
        assert_eq!(CovPair::new(3, 1).unwrap().as_tuple(), (1, 3));
        assert!(CovPair::new(2, 2).is_none());
    }

    #[test]
    fn diagonal_served_from_univariable_stats() {
        let cache = AggregateCache::new(vec![5.0, -3.0], vec![3.0, 3.0]).unwrap();
        assert_eq!(cache.covariance(1, 1), Some(3.0));
        assert!(cache.is_available(0, 0));
        assert!(!cache.is_available(0, 1));
    }

    #[test]
    fn symmetric_lookup_and_monotone_insert() {
        let mut cache = AggregateCache::new(vec![5.0, -3.0], vec![3.0, 3.0]).unwrap();
        let pair = CovPair::new(1, 0).unwrap();
        cache.insert(pair, 1.0);
        cache.insert(pair, 99.0);
        assert_eq!(cache.covariance(0, 1), Some(1.0));
        assert_eq!(cache.covariance(1, 0), Some(1.0));
        assert_eq!(cache.off_diagonal_len(), 1);
    }

    #[test]
    fn rejects_non_positive_diagonal() {
        let err = AggregateCache::new(vec![1.0, 1.0], vec![2.0, 0.0]).unwrap_err();
        assert!(matches!(err, BoostError::DegenerateDiagonal { j: 1, .. }));
        let err = AggregateCache::new(vec![1.0], vec![f64::NAN]).unwrap_err();
        assert!(matches!(err, BoostError::DegenerateDiagonal { j: 0, .. }));
    }
}
