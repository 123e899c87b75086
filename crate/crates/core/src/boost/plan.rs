use std::collections::BTreeSet;

use super::{AggregateCache, BoostError, BoostingState, CovPair, FetchMode};

/// Coefficient change chosen in one boosting step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Update {
    pub covariate: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FetchReason {
    NewInclusion,
    HeuristicCandidate,
    BlockBuffer,
}

/// Off-diagonal pairs that must be requested before a step can be scored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchPlan {
    pub pairs: Vec<CovPair>,
    pub reason: FetchReason,
}

impl FetchPlan {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }
}

/// Covariates considered in one step.
///
/// `heuristic` must be scored; `extended` adds the prefetch buffer in block
/// mode and equals `heuristic` otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepCandidates {
    pub heuristic: Vec<usize>,
    pub extended: Vec<usize>,
}

/// `S_j = A_j − Σ_k β_k C_jk` for each candidate, from cached aggregates only.
pub fn compute_scores(
    cache: &AggregateCache,
    state: &BoostingState,
    candidates: &[usize],
) -> Result<Vec<f64>, BoostError> {
    candidates
        .iter()
        .map(|&j| {
            let mut score = cache.a(j);
            for (k, b) in state.beta_entries() {
                let c = cache.covariance(j, k).ok_or(BoostError::MissingCovariance { j, k })?;
                score -= b * c;
            }
            Ok(score)
        })
        .collect()
}

/// Picks the candidate with the largest squared score (lowest index on ties)
/// and its shrunken least-squares step `ν · S_j / C_jj`.
pub fn select_update(
    candidates: &[usize],
    scores: &[f64],
    cache: &AggregateCache,
    nu: f64,
) -> Result<Update, BoostError> {
    let mut best: Option<(usize, f64)> = None;
    for (&j, &s) in candidates.iter().zip(scores) {
        best = match best {
            None => Some((j, s)),
            Some((bj, bs)) => {
                let (sq, bsq) = (s * s, bs * bs);
                if sq > bsq || (sq == bsq && j < bj) {
                    Some((j, s))
                } else {
                    Some((bj, bs))
                }
            }
        };
    }
    let (covariate, score) = best.ok_or(BoostError::EmptyCandidateSet)?;
    Ok(Update {
        covariate,
        delta: nu * score / cache.c_diag(covariate),
    })
}

/// Included covariates plus every covariate whose squared initial score
/// reaches the smallest current squared score among the included ones.
///
/// Scores of included covariates in `state` must be current.
pub fn heuristic_candidates(state: &BoostingState) -> Vec<usize> {
    let p = state.p();
    if state.model_size() == 0 {
        return (0..p).collect();
    }
    let threshold = state
        .inclusion_order()
        .iter()
        .map(|&l| state.scores()[l].powi(2))
        .fold(f64::INFINITY, f64::min);
    (0..p)
        .filter(|&j| state.is_included(j) || state.initial_scores()[j].powi(2) >= threshold)
        .collect()
}

/// Adds the `w` covariates outside `candidates` with the largest squared
/// initial scores.
pub fn block_extension(state: &BoostingState, candidates: &[usize], w: usize) -> Vec<usize> {
    let inside: BTreeSet<usize> = candidates.iter().copied().collect();
    let initial = state.initial_scores();
    let mut rest: Vec<usize> = (0..state.p()).filter(|j| !inside.contains(j)).collect();
    rest.sort_by(|&a, &b| initial[b].powi(2).total_cmp(&initial[a].powi(2)).then(a.cmp(&b)));
    let mut extended = inside;
    extended.extend(rest.into_iter().take(w));
    extended.into_iter().collect()
}

pub fn step_candidates(mode: &FetchMode, state: &BoostingState) -> StepCandidates {
    match *mode {
        FetchMode::Full => {
            let all: Vec<usize> = (0..state.p()).collect();
            StepCandidates {
                heuristic: all.clone(),
                extended: all,
            }
        }
        FetchMode::Heuristic => {
            let heuristic = heuristic_candidates(state);
            StepCandidates {
                extended: heuristic.clone(),
                heuristic,
            }
        }
        FetchMode::BlockHeuristic { buffer } => {
            let heuristic = heuristic_candidates(state);
            let extended = block_extension(state, &heuristic, buffer);
            StepCandidates { heuristic, extended }
        }
    }
}

/// Decides which pairs the next data call must carry.
///
/// A call is only needed when a heuristic candidate lacks a covariance with
/// some included covariate. Full and heuristic modes then request exactly
/// the missing candidate-by-included pairs; block mode requests every
/// missing pair within the extended set. Block mode also fetches its block
/// as soon as the first covariate is included, so the buffer is scored from
/// the second step on.
pub fn plan_fetch(
    mode: &FetchMode,
    state: &BoostingState,
    cache: &AggregateCache,
    candidates: &StepCandidates,
) -> FetchPlan {
    let reason = match mode {
        FetchMode::Full => FetchReason::NewInclusion,
        FetchMode::Heuristic => FetchReason::HeuristicCandidate,
        FetchMode::BlockHeuristic { .. } => FetchReason::BlockBuffer,
    };
    let missing_needed: BTreeSet<CovPair> = candidates
        .heuristic
        .iter()
        .flat_map(|&j| state.inclusion_order().iter().filter_map(move |&k| CovPair::new(j, k)))
        .filter(|pair| !cache.contains(pair))
        .collect();
    let first_block =
        matches!(mode, FetchMode::BlockHeuristic { .. }) && state.model_size() > 0 && cache.off_diagonal_len() == 0;
    if missing_needed.is_empty() && !first_block {
        return FetchPlan {
            pairs: Vec::new(),
            reason,
        };
    }
    let pairs = match mode {
        FetchMode::BlockHeuristic { .. } => {
            let block = &candidates.extended;
            let mut pairs = Vec::new();
            for (a, &j) in block.iter().enumerate() {
                for &k in &block[a + 1..] {
                    let pair = CovPair::new(j, k).expect("block indices are distinct");
                    if !cache.contains(&pair) {
                        pairs.push(pair);
                    }
                }
            }
            pairs.sort();
            pairs
        }
        _ => missing_needed.into_iter().collect(),
    };
    FetchPlan { pairs, reason }
}

/// Covariates scored in this step: the heuristic candidates plus every
/// buffered covariate whose covariances with the included ones are cached.
pub fn scoring_set(state: &BoostingState, cache: &AggregateCache, candidates: &StepCandidates) -> Vec<usize> {
    let heuristic: BTreeSet<usize> = candidates.heuristic.iter().copied().collect();
    let mut set = heuristic.clone();
    set.extend(
        candidates
            .extended
            .iter()
            .copied()
            .filter(|&j| !heuristic.contains(&j) && state.inclusion_order().iter().all(|&k| cache.is_available(j, k))),
    );
    set.into_iter().collect()
}
