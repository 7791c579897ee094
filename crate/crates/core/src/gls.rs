//! Guided Local Search for the TSP.
//!
//! Each iteration runs 2-opt and relocate to a local optimum of the
//! augmented cost `d_ij + lambda * avg_edge * penalty_ij`, penalizes the tour
//! edge with the highest utility `guidance_ij / (1 + penalty_ij)` and perturbs
//! the tour with random segment reversals. The average edge length is taken
//! from the nearest-neighbor starting tour, which keeps `lambda` scale-free.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::problem::tour_length;
use crate::rng;

const IMPROVEMENT_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlsParams {
    pub perturbation_moves: usize,
    pub n_iterations: usize,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for GlsParams {
    fn default() -> Self {
        Self {
            perturbation_moves: 30,
            n_iterations: 100,
            lambda: 0.1,
            seed: 0,
        }
    }
}

impl GlsParams {
    /// Testing budget for the tabulated TSP sizes.
    pub fn preset(size: usize) -> Option<Self> {
        let (moves, iters) = match size {
            20 => (5, 73),
            50 => (30, 175),
            100 => (40, 1800),
            200 => (40, 800),
            _ => return None,
        };
        Some(Self {
            perturbation_moves: moves,
            n_iterations: iters,
            lambda: 0.1,
            seed: 0,
        })
    }

    /// Budget used while scoring candidates during evolution.
    pub fn training() -> Self {
        Self {
            perturbation_moves: 40,
            n_iterations: 1200,
            lambda: 0.1,
            seed: 0,
        }
    }
}

/// Symmetric, non-negative edge penalty counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PenaltyState {
    n: usize,
    counts: Vec<u32>,
}

impl PenaltyState {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            counts: vec![0; n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.n + j]
    }

    fn bump(&mut self, i: usize, j: usize) {
        self.counts[i * self.n + j] += 1;
        self.counts[j * self.n + i] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum::<u64>() / 2
    }
}

/// Greedy tour from node 0, always moving to the closest unvisited node
/// (lowest index on ties).
pub fn nearest_neighbor_tour(dist: &Matrix) -> Vec<usize> {
    let n = dist.rows();
    let mut visited = vec![false; n];
    let mut tour = Vec::with_capacity(n);
    if n == 0 {
        return tour;
    }
    let mut cur = 0;
    visited[0] = true;
    tour.push(0);
    for _ in 1..n {
        let row = dist.row(cur);
        let mut next = usize::MAX;
        let mut best = f64::INFINITY;
        for (j, &d) in row.iter().enumerate() {
            if !visited[j] && d < best {
                best = d;
                next = j;
            }
        }
        visited[next] = true;
        tour.push(next);
        cur = next;
    }
    tour
}

/// Applies improving 2-opt moves (first improvement) until none remains.
/// Returns whether the tour changed.
pub fn two_opt(cost: &Matrix, tour: &mut [usize]) -> bool {
    let n = tour.len();
    if n < 4 {
        return false;
    }
    let mut changed = false;
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n - 1 {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b, c, d) = (tour[i], tour[i + 1], tour[j], tour[(j + 1) % n]);
                let delta = cost[(a, c)] + cost[(b, d)] - cost[(a, b)] - cost[(c, d)];
                if delta < -IMPROVEMENT_EPS {
                    tour[i + 1..=j].reverse();
                    improved = true;
                    changed = true;
                }
            }
        }
    }
    changed
}

/// Applies improving single-node relocations (first improvement) until
/// none remains. Returns whether the tour changed.
pub fn relocate(cost: &Matrix, tour: &mut Vec<usize>) -> bool {
    let n = tour.len();
    if n < 4 {
        return false;
    }
    let mut changed = false;
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n {
            let p = tour[(i + n - 1) % n];
            let x = tour[i];
            let nx = tour[(i + 1) % n];
            let removal = cost[(p, x)] + cost[(x, nx)] - cost[(p, nx)];
            // Insert x between tour[j] and tour[j + 1]; skip the two slots
            // adjacent to its current position.
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                if j == i || (j + 1) % n == i {
                    continue;
                }
                let a = tour[j];
                let b = tour[(j + 1) % n];
                let insertion = cost[(a, x)] + cost[(x, b)] - cost[(a, b)];
                let delta = insertion - removal;
                if delta < -IMPROVEMENT_EPS {
                    best = Some((j, delta));
                    break;
                }
            }
            if let Some((j, _)) = best {
                let node = tour.remove(i);
                let j = if j > i { j - 1 } else { j };
                tour.insert(j + 1, node);
                improved = true;
                changed = true;
                break;
            }
        }
    }
    changed
}

/// Alternates 2-opt and relocate under `cost` until neither improves.
pub fn local_search(cost: &Matrix, tour: &mut Vec<usize>) {
    loop {
        let a = two_opt(cost, tour);
        let b = relocate(cost, tour);
        if !a && !b {
            break;
        }
    }
}

/// Penalizes the tour edge with maximal `guidance / (1 + penalty)`, breaking
/// ties by the lexicographically smallest `(min, max)` endpoint pair.
/// Returns the penalized edge.
pub fn penalize(tour: &[usize], guidance: &Matrix, penalties: &mut PenaltyState) -> (usize, usize) {
    let n = tour.len();
    let mut best_edge = (usize::MAX, usize::MAX);
    let mut best_util = f64::NEG_INFINITY;
    for k in 0..n {
        let (a, b) = (tour[k], tour[(k + 1) % n]);
        let edge = (a.min(b), a.max(b));
        let util = guidance[edge] / (1.0 + f64::from(penalties.get(edge.0, edge.1)));
        if util > best_util || (util == best_util && edge < best_edge) {
            best_util = util;
            best_edge = edge;
        }
    }
    penalties.bump(best_edge.0, best_edge.1);
    best_edge
}

/// Result of [`run_gls`].
#[derive(Clone, Debug, PartialEq)]
pub struct GlsRun {
    pub tour: Vec<usize>,
    pub length: f64,
    /// Best-so-far true length after each iteration.
    pub trajectory: Vec<f64>,
    pub iterations_run: usize,
}

/// Runs guided local search from the nearest-neighbor tour.
///
/// When `optimum` is supplied the loop stops as soon as the best tour
/// reaches it (zero optimality gap). Each local optimum under augmented cost
/// is also polished under the true cost before the best is updated.
pub fn run_gls(dist: &Matrix, guidance: &Matrix, params: &GlsParams, optimum: Option<f64>) -> GlsRun {
    let n = dist.rows();
    let mut tour = nearest_neighbor_tour(dist);
    let mut best_tour = tour.clone();
    let mut best_len = tour_length(dist, &tour);
    let mut trajectory = Vec::with_capacity(params.n_iterations);
    if n < 4 || params.n_iterations == 0 {
        return GlsRun {
            tour: best_tour,
            length: best_len,
            trajectory,
            iterations_run: 0,
        };
    }
    let step = params.lambda * best_len / n as f64;
    let mut augmented = dist.clone();
    let mut penalties = PenaltyState::new(n);
    let mut rng = rng::stream(params.seed, 0);
    let mut iterations_run = 0;
    for _ in 0..params.n_iterations {
        iterations_run += 1;
        local_search(&augmented, &mut tour);
        let mut polished = tour.clone();
        local_search(dist, &mut polished);
        let len = tour_length(dist, &polished);
        if len < best_len - IMPROVEMENT_EPS {
            best_len = len;
            best_tour = polished;
        }
        trajectory.push(best_len);
        if optimum.is_some_and(|opt| best_len <= opt + 1e-9) {
            break;
        }
        let (i, j) = penalize(&tour, guidance, &mut penalties);
        let w = dist[(i, j)] + step * f64::from(penalties.get(i, j));
        augmented[(i, j)] = w;
        augmented[(j, i)] = w;
        for _ in 0..params.perturbation_moves {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            let (lo, hi) = (a.min(b), a.max(b));
            if hi > lo {
                tour[lo..=hi].reverse();
            }
        }
    }
    GlsRun {
        tour: best_tour,
        length: best_len,
        trajectory,
        iterations_run,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::enumerate_optimal;
    use crate::problem::{distance_matrix, generate_instance, GeneratorConfig, ProblemKind};

    fn dist(n: usize, seed: u64) -> Matrix {
        generate_instance(ProblemKind::Tsp, n, seed, 0, &GeneratorConfig::default())
            .unwrap()
            .distances()
            .unwrap()
            .clone()
    }

    fn is_perm(t: &[usize], n: usize) -> bool {
        let mut s = t.to_vec();
        s.sort_unstable();
        s == (0..n).collect::<Vec<_>>()
    }

    #[test]
    fn presets() {
        let p = GlsParams::preset(20).unwrap();
        assert_eq!((p.perturbation_moves, p.n_iterations, p.lambda), (5, 73, 0.1));
        assert_eq!(GlsParams::preset(50).unwrap().n_iterations, 175);
        assert_eq!(GlsParams::preset(100).unwrap().n_iterations, 1800);
        assert_eq!(GlsParams::preset(200).unwrap().perturbation_moves, 40);
        assert!(GlsParams::preset(30).is_none());
    }

    #[test]
    fn square_optimum_untouched() {
        let d = distance_matrix(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let mut t = vec![0, 1, 2, 3];
        local_search(&d, &mut t);
        assert_eq!(t, vec![0, 1, 2, 3]);
    }

    #[test]
    fn crossing_removed_by_one_two_opt() {
        let d = distance_matrix(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let mut t = vec![0, 2, 1, 3];
        assert!((tour_length(&d, &t) - (2.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!(two_opt(&d, &mut t));
        assert!((tour_length(&d, &t) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn augmented_local_optimum_has_no_improving_two_opt() {
        let d = dist(12, 4);
        let mut pen = PenaltyState::new(12);
        let guidance = d.clone();
        let mut tour = nearest_neighbor_tour(&d);
        let mut aug = d.clone();
        for _ in 0..5 {
            let (i, j) = penalize(&tour, &guidance, &mut pen);
            aug[(i, j)] = d[(i, j)] + 0.05 * f64::from(pen.get(i, j));
            aug[(j, i)] = aug[(i, j)];
        }
        local_search(&aug, &mut tour);
        let n = tour.len();
        for i in 0..n {
            for j in (i + 1)..n {
                // Reverse tour[i..=j] and compare full augmented lengths.
                let mut alt = tour.clone();
                alt[i..=j].reverse();
                assert!(
                    tour_length(&aug, &alt) >= tour_length(&aug, &tour) - 1e-9,
                    "improving move ({i}, {j}) left"
                );
            }
        }
        for w in 0..12 {
            for v in 0..12 {
                assert!(aug[(w, v)] >= d[(w, v)]);
            }
        }
    }

    #[test]
    fn max_guidance_edge_is_penalized() {
        let g = Matrix::from_fn(4, 4, |i, j| (i * 4 + j) as f64);
        let mut pen = PenaltyState::new(4);
        // Tour edges: (0,1) (1,2) (2,3) (0,3); canonical utilities 1, 6, 11, 3.
        assert_eq!(penalize(&[0, 1, 2, 3], &g, &mut pen), (2, 3));
        assert_eq!(pen.get(3, 2), 1);
    }

    #[test]
    fn uniform_guidance_picks_smallest_edge() {
        let g = Matrix::filled(5, 5, 1.0);
        let mut pen = PenaltyState::new(5);
        assert_eq!(penalize(&[3, 1, 4, 2, 0], &g, &mut pen), (0, 2));
    }

    fn rounds_until_dethroned(g1: f64, g2: f64) -> usize {
        // Edge (0,1) has guidance g1, the runner-up (1,2) has g2.
        let g = Matrix::from_fn(4, 4, |i, j| match (i.min(j), i.max(j)) {
            (0, 1) => g1,
            (1, 2) => g2,
            _ => 0.5,
        });
        let mut pen = PenaltyState::new(4);
        let mut rounds = 0;
        while penalize(&[0, 1, 2, 3], &g, &mut pen) == (0, 1) {
            rounds += 1;
        }
        rounds
    }

    #[test]
    fn dominant_edge_utility_decay() {
        for (g1, g2) in [(7.0, 2.0), (6.0, 2.0), (9.0, 1.0), (2.5, 2.0)] {
            // Oracle: iterate the recurrence u_p = g1 / (1 + p) directly; the
            // dominant edge keeps winning while u_p >= g2 (ties go to (0,1)).
            let mut expected = 0;
            while g1 / (1.0 + expected as f64) >= g2 {
                expected += 1;
            }
            assert_eq!(rounds_until_dethroned(g1, g2), expected, "g1={g1} g2={g2}");
        }
        // For integral ratios the count is exactly ceil(g1 / g2).
        assert_eq!(rounds_until_dethroned(6.0, 2.0), crate::math::ceil(6.0 / 2.0) as usize);
        assert_eq!(rounds_until_dethroned(9.0, 1.0), 9);
    }

    #[test]
    fn zero_iterations_returns_nearest_neighbor() {
        let d = dist(15, 2);
        let params = GlsParams {
            n_iterations: 0,
            ..GlsParams::default()
        };
        let run = run_gls(&d, &d, &params, None);
        assert_eq!(run.tour, nearest_neighbor_tour(&d));
    }

    #[test]
    fn five_nodes_optimal() {
        for seed in 0..10 {
            let d = dist(5, seed);
            let (opt, _) = enumerate_optimal(&d);
            let run = run_gls(&d, &d, &GlsParams::preset(20).unwrap(), None);
            assert!((run.length - opt).abs() < 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn best_so_far_monotone_and_valid() {
        let d = dist(40, 9);
        let run = run_gls(&d, &d, &GlsParams { n_iterations: 50, ..GlsParams::default() }, None);
        assert!(is_perm(&run.tour, 40));
        for w in run.trajectory.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!((tour_length(&d, &run.tour) - run.length).abs() < 1e-9);
    }
}
