//! Exact TSP references: Held-Karp dynamic programming and full enumeration.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::Matrix;
use crate::problem::tour_length;

/// Largest instance [`held_karp`] accepts (memory grows as `2^(n-1) * n`).
pub const HELD_KARP_MAX_NODES: usize = 22;

/// Optimal tour by Held-Karp over subsets of nodes `1..n`, anchored at node 0.
///
/// Returns `None` when `n` exceeds [`HELD_KARP_MAX_NODES`].
pub fn held_karp(dist: &Matrix) -> Option<(f64, Vec<usize>)> {
    let n = dist.rows();
    if n > HELD_KARP_MAX_NODES {
        return None;
    }
    if n <= 3 {
        let tour: Vec<usize> = (0..n).collect();
        return Some((tour_length(dist, &tour), tour));
    }
    let m = n - 1;
    let full = 1usize << m;
    let mut cost = vec![f64::INFINITY; full * m];
    let mut parent = vec![u8::MAX; full * m];
    for j in 0..m {
        cost[(1 << j) * m + j] = dist[(0, j + 1)];
    }
    for mask in 1..full {
        for last in 0..m {
            if mask & (1 << last) == 0 {
                continue;
            }
            let here = cost[mask * m + last];
            if !here.is_finite() {
                continue;
            }
            let row = dist.row(last + 1);
            let mut rest = !mask & (full - 1);
            while rest != 0 {
                let next = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let nm = mask | (1 << next);
                let cand = here + row[next + 1];
                let slot = nm * m + next;
                if cand < cost[slot] {
                    cost[slot] = cand;
                    parent[slot] = last as u8;
                }
            }
        }
    }
    let last_mask = full - 1;
    let (mut best, mut last) = (f64::INFINITY, 0);
    for j in 0..m {
        let c = cost[last_mask * m + j] + dist[(j + 1, 0)];
        if c < best {
            best = c;
            last = j;
        }
    }
    let mut tour = Vec::with_capacity(n);
    let mut mask = last_mask;
    let mut cur = last;
    loop {
        tour.push(cur + 1);
        let p = parent[mask * m + cur];
        mask &= !(1 << cur);
        if p == u8::MAX {
            break;
        }
        cur = p as usize;
    }
    tour.push(0);
    tour.reverse();
    Some((best, tour))
}

/// Optimal tour by enumerating every permutation of nodes `1..n`.
/// Intended for `n <= 10`.
pub fn enumerate_optimal(dist: &Matrix) -> (f64, Vec<usize>) {
    let n = dist.rows();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = (tour_length(dist, &perm), perm.clone());
    if n <= 3 {
        return best;
    }
    // Heap's algorithm over positions 1..n.
    let k = n - 1;
    let mut c = vec![0usize; k];
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(1, 1 + i);
            } else {
                perm.swap(1 + c[i], 1 + i);
            }
            let len = tour_length(dist, &perm);
            if len < best.0 {
                best = (len, perm.clone());
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Number of distinct undirected tours on `n >= 3` nodes.
pub fn distinct_tours(n: usize) -> usize {
    (1..n).product::<usize>() / 2
}
