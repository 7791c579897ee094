//! A bounded, ranked population of valid heuristic candidates.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::heuristic::HeuristicCandidate;
use crate::selection::{survival_order, top_n};

pub const DEFAULT_SIZE: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Population {
    capacity: usize,
    members: Vec<HeuristicCandidate>,
}

impl Population {
    pub fn empty(capacity: usize) -> Self {
        Self {
            capacity,
            members: Vec::new(),
        }
    }

    /// Best `capacity` valid candidates, keeping one member per normalized
    /// source.
    pub fn select(candidates: impl IntoIterator<Item = HeuristicCandidate>, capacity: usize) -> Self {
        let mut ranked = top_n(candidates, usize::MAX);
        let mut seen: BTreeSet<String> = BTreeSet::new();
        ranked.retain(|c| seen.insert(c.source_hash()));
        ranked.truncate(capacity);
        if ranked.len() < capacity {
            log::info!("population holds {} of {capacity} members", ranked.len());
        }
        Self {
            capacity,
            members: ranked,
        }
    }

    /// Next population from the current members and new candidates.
    pub fn merge(&self, candidates: impl IntoIterator<Item = HeuristicCandidate>, keep_current: bool) -> Self {
        let current = if keep_current { self.members.clone() } else { Vec::new() };
        Self::select(current.into_iter().chain(candidates), self.capacity)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn members(&self) -> &[HeuristicCandidate] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn best(&self) -> Option<&HeuristicCandidate> {
        self.members.first()
    }

    pub fn get(&self, rank: usize) -> Option<&HeuristicCandidate> {
        self.members.get(rank)
    }

    /// Sorted, bounded, all valid, no duplicate sources.
    pub fn invariants_hold(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.members.len() <= self.capacity
            && self.members.iter().all(|c| c.is_valid() && seen.insert(c.source_hash()))
            && self
                .members
                .windows(2)
                .all(|w| survival_order(&w[0], &w[1]) != core::cmp::Ordering::Greater)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristic::{Failure, Lineage, Origin};

    fn cand(id: u64, src: &str, fitness: Option<f64>) -> HeuristicCandidate {
        let mut c = HeuristicCandidate::new(
            id,
            "",
            src,
            Lineage {
                origin: Origin::Seeded,
                generation: 0,
            },
        );
        match fitness {
            Some(f) => c.mark_valid(f),
            None => c.mark_invalid(Failure::Timeout),
        }
        c
    }

    #[test]
    fn duplicate_sources_collapse_to_best() {
        let pop = Population::select(
            [
                cand(0, "def h(d): return d", Some(-2.0)),
                cand(1, "def h(d):\n    return d", Some(-1.0)),
                cand(2, "def g(d): return -d", None),
            ],
            10,
        );
        assert_eq!(pop.len(), 1);
        assert_eq!(pop.best().unwrap().id, 1);
        assert!(pop.invariants_hold());
    }

    #[test]
    fn merge_respects_capacity() {
        let pop = Population::select((0..4).map(|i| cand(i, &alloc::format!("s{i}"), Some(i as f64))), 3);
        assert_eq!(pop.members().iter().map(|c| c.id).collect::<Vec<_>>(), [3, 2, 1]);
        let next = pop.merge([cand(9, "new", Some(10.0))], true);
        assert_eq!(next.members().iter().map(|c| c.id).collect::<Vec<_>>(), [9, 3, 2]);
        let fresh = pop.merge([cand(9, "new", Some(10.0))], false);
        assert_eq!(fresh.len(), 1);
    }
}
