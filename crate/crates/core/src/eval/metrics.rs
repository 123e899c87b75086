use super::EvalError;
use crate::simgen::TruthVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionMetrics {
    pub tpr: f64,
    pub fpr: f64,
}

/// `tpr`: mean over effect covariates of the fraction of replicates that
/// select it among their first `k`. `fpr`: mean over replicates of the
/// share of nulls among the first `k`.
pub fn selection_metrics(
    selections: &[Vec<usize>],
    truth: &TruthVector,
    k: usize,
) -> Result<SelectionMetrics, EvalError> {
    if selections.is_empty() {
        return Err(EvalError::EmptyResults);
    }
    let effects = truth.effect_indices();
    let r = selections.len() as f64;
    let tpr = if effects.is_empty() {
        0.0
    } else {
        let hits: usize = selections
            .iter()
            .map(|sel| sel.iter().take(k).filter(|j| truth.is_effect(**j)).count())
            .sum();
        hits as f64 / (r * effects.len() as f64)
    };
    let fpr = selections
        .iter()
        .map(|sel| sel.iter().take(k).filter(|j| !truth.is_effect(**j)).count() as f64 / k as f64)
        .sum::<f64>()
        / r;
    Ok(SelectionMetrics { tpr, fpr })
}

/// Exact Mann–Whitney AUC: `P(s⁺ > s⁻) + ½ P(s⁺ = s⁻)`.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(EvalError::NonFinite);
    }
    let positives = labels.iter().filter(|l| **l).count() as u128;
    let negatives = labels.len() as u128 - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the Mann–Whitney U, kept in integers
    let mut u2: u128 = 0;
    let mut negatives_below: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u128, 0u128);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        u2 += 2 * pos * negatives_below + pos * neg;
        negatives_below += neg;
        i = j;
    }
    Ok(u2 as f64 / (2 * positives * negatives) as f64)
}
