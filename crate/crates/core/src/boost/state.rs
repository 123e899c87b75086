use std::collections::BTreeMap;

/// Mutable state of one boosting run.
///
/// `scores` holds the most recent score of every covariate; only the
/// entries listed in `candidate_set` are current for this step.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostingState {
    beta: BTreeMap<usize, f64>,
    step: usize,
    scores: Vec<f64>,
    initial_scores: Vec<f64>,
    inclusion_order: Vec<usize>,
    candidate_set: Vec<usize>,
}

impl BoostingState {
    /// Starts from `β = 0`, where every score equals its univariable
    /// cross-product.
    pub fn new(initial_scores: Vec<f64>) -> Self {
        let p = initial_scores.len();
        Self {
            beta: BTreeMap::new(),
            step: 0,
            scores: initial_scores.clone(),
            initial_scores,
            inclusion_order: Vec::new(),
            candidate_set: (0..p).collect(),
        }
    }

    pub fn p(&self) -> usize {
        self.initial_scores.len()
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn beta(&self, j: usize) -> f64 {
        self.beta.get(&j).copied().unwrap_or(0.0)
    }

    /// Nonzero coefficients in index order.
    pub fn beta_entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.beta.iter().map(|(&k, &b)| (k, b))
    }

    pub fn coefficients(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.p()];
        for (k, b) in self.beta_entries() {
            dense[k] = b;
        }
        dense
    }

    pub fn is_included(&self, j: usize) -> bool {
        self.beta.contains_key(&j)
    }

    /// Covariates in the order they were first selected.
    pub fn inclusion_order(&self) -> &[usize] {
        &self.inclusion_order
    }

    pub fn model_size(&self) -> usize {
        self.inclusion_order.len()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn initial_scores(&self) -> &[f64] {
        &self.initial_scores
    }

    pub fn candidate_set(&self) -> &[usize] {
        &self.candidate_set
    }

    /// Stores freshly computed scores; they become the current candidate set.
    pub fn record_scores(&mut self, candidates: &[usize], scores: &[f64]) {
        debug_assert_eq!(candidates.len(), scores.len());
        for (&j, &s) in candidates.iter().zip(scores) {
            self.scores[j] = s;
        }
        self.candidate_set = candidates.to_vec();
    }

    /// Stores scores without changing the candidate set.
    pub(crate) fn refresh_scores(&mut self, covariates: &[usize], scores: &[f64]) {
        for (&j, &s) in covariates.iter().zip(scores) {
            self.scores[j] = s;
        }
    }

    /// `β_j += delta`; a first selection appends `j` to the inclusion order.
    pub fn apply_update(&mut self, j: usize, delta: f64) {
        assert!(j < self.p(), "covariate {j} out of range");
        match self.beta.get_mut(&j) {
            Some(b) => *b += delta,
            None => {
                self.beta.insert(j, delta);
                self.inclusion_order.push(j);
            }
        }
        self.step += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_update_includes_covariate() {
        let mut state = BoostingState::new(vec![0.0; 2]);
        state.apply_update(0, 0.2);
        assert_eq!(state.coefficients(), vec![0.2, 0.0]);
        assert_eq!(state.inclusion_order(), &[0]);
        assert_eq!(state.step(), 1);
    }

    #[test]
    fn reselection_does_not_reappend() {
        let mut state = BoostingState::new(vec![0.0; 2]);
        state.apply_update(0, 0.2);
        state.apply_update(0, 0.1);
        assert!((state.beta(0) - 0.3).abs() < 1e-15);
        assert_eq!(state.inclusion_order(), &[0]);
        assert_eq!(state.step(), 2);
    }

    #[test]
    fn distinct_updates_grow_inclusion_order() {
        let mut state = BoostingState::new(vec![0.0; 3]);
        state.apply_update(2, 0.1);
        state.apply_update(0, -0.1);
        assert_eq!(state.inclusion_order(), &[2, 0]);
        assert_eq!(state.model_size(), 2);
        assert_eq!(state.beta(1), 0.0);
    }
}
