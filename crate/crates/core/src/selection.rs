//! Rank-based parent and elite-pair selection, and deterministic top-N survival.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::Rng as _;

use crate::heuristic::HeuristicCandidate;
use crate::math;
use crate::rng::Rng;

/// Default decay exponent of elite selection.
pub const ELITE_POWER: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SelectionError {
    TooFew { needed: usize, available: usize },
}

impl fmt::Display for SelectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionError::TooFew { needed, available } => {
                write!(f, "selection needs at least {needed} members, population has {available}")
            }
        }
    }
}

/// `p_i = (i+1)^-k / sum_j (j+1)^-k` for ranks `0..n`.
pub fn elite_probabilities(n: usize, k: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|i| 1.0 / math::pow((i + 1) as f64, k)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Index drawn with probability proportional to `weights`.
pub fn sample_weighted(weights: &[f64], rng: &mut Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// Ranks of a collaborating pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ElitePair {
    /// Rank drawn from [`elite_probabilities`].
    pub sampled: usize,
    /// Better-ranked member.
    pub first: usize,
    /// Worse-ranked member, `first + 1` or `first + 2`.
    pub second: usize,
}

/// Draws an adjacent-rank pair from a population of `n` ranked members.
///
/// When the last rank is drawn there is no later partner, so the pair
/// becomes `(n - 2, n - 1)`; `sampled` still reports the raw draw.
pub fn elite_pair_select(n: usize, k: f64, rng: &mut Rng) -> Result<ElitePair, SelectionError> {
    if n < 2 {
        return Err(SelectionError::TooFew { needed: 2, available: n });
    }
    let sampled = sample_weighted(&elite_probabilities(n, k), rng);
    let first = sampled.min(n - 2);
    let second = if first + 2 < n && rng.random::<bool>() {
        first + 2
    } else {
        first + 1
    };
    Ok(ElitePair { sampled, first, second })
}

/// Draws `count` distinct ranks with weights `1 / (rank + n)`.
pub fn select_parents(n: usize, count: usize, rng: &mut Rng) -> Result<Vec<usize>, SelectionError> {
    if n < count || count == 0 {
        return Err(SelectionError::TooFew {
            needed: count.max(1),
            available: n,
        });
    }
    let mut weights: Vec<f64> = (0..n).map(|r| 1.0 / (r + n) as f64).collect();
    let mut chosen = Vec::with_capacity(count);
    for _ in 0..count {
        let i = sample_weighted(&weights, rng);
        weights[i] = 0.0;
        chosen.push(i);
    }
    Ok(chosen)
}

/// Survival order: fitness descending, then earlier creation, then source hash.
pub fn survival_order(a: &HeuristicCandidate, b: &HeuristicCandidate) -> Ordering {
    let fa = a.fitness().unwrap_or(f64::NEG_INFINITY);
    let fb = b.fitness().unwrap_or(f64::NEG_INFINITY);
    fb.partial_cmp(&fa)
        .unwrap_or(Ordering::Equal)
        .then(a.id.cmp(&b.id))
        .then_with(|| a.source_hash().cmp(&b.source_hash()))
}

/// The `n` best valid candidates in survival order.
pub fn top_n(candidates: impl IntoIterator<Item = HeuristicCandidate>, n: usize) -> Vec<HeuristicCandidate> {
    let mut valid: Vec<HeuristicCandidate> = candidates
        .into_iter()
        .filter(|c| c.is_valid() && c.fitness().is_some_and(f64::is_finite))
        .collect();
    valid.sort_by(survival_order);
    valid.truncate(n);
    valid
}
