//! Ant Colony Optimization driven by a heuristic matrix (or vector) `eta`.
//!
//! Component structure per kind:
//!
//! * TSP, CVRP, OP: directed edges `(i, j)`; `tau` and `eta` are `n x n`.
//! * MKP: items; `tau` and `eta` are length-`n` vectors.
//! * BPP: item pairs; `eta[i][j]` is the affinity of packing `i` and `j`
//!   together. An ant opens a bin with the largest unpacked item and then
//!   adds fitting items with probability proportional to
//!   `(sum_b tau[b][c])^alpha * (sum_b eta[b][c])^beta` over the items `b`
//!   already in the bin.
//!
//! Candidates with zero combined weight are never chosen unless every
//! feasible candidate has zero weight, in which case the choice is uniform.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::heuristic::Guidance;
use crate::math;
use crate::matrix::Matrix;
use crate::problem::{objective_unchecked, CopInstance, Direction, Payload, ProblemKind, Solution};
use crate::rng::{self, Rng};

/// Which solutions deposit pheromone after an iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepositRule {
    IterationBest,
    AllAnts,
}

/// Budget phase of a run: candidate evaluation during evolution or final testing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Evaluation,
    Testing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcoParams {
    pub n_ants: usize,
    pub n_iterations: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Evaporation rate in `(0, 1)`; `0` disables evaporation.
    pub rho: f64,
    /// Deposit scale `Q`.
    pub q: f64,
    pub tau_init: f64,
    pub tau_floor: f64,
    pub deposit: DepositRule,
    pub seed: u64,
}

impl Default for AcoParams {
    fn default() -> Self {
        Self {
            n_ants: 30,
            n_iterations: 100,
            alpha: 1.0,
            beta: 1.0,
            rho: 0.1,
            q: 1.0,
            tau_init: 1.0,
            tau_floor: 1e-10,
            deposit: DepositRule::AllAnts,
            seed: 0,
        }
    }
}

/// Ants, evaluation-phase iterations and testing-phase iterations per kind.
pub fn budget(kind: ProblemKind) -> (usize, usize, usize) {
    match kind {
        ProblemKind::Tsp => (30, 200, 500),
        ProblemKind::Op => (30, 100, 200),
        ProblemKind::Cvrp => (20, 100, 500),
        ProblemKind::Mkp => (10, 50, 100),
        ProblemKind::Bpp => (20, 100, 100),
    }
}

impl AcoParams {
    /// Built-in budget for `(kind, phase)` with default exponents.
    pub fn preset(kind: ProblemKind, phase: Phase) -> Self {
        let (ants, eval_iters, test_iters) = budget(kind);
        Self {
            n_ants: ants,
            n_iterations: match phase {
                Phase::Evaluation => eval_iters,
                Phase::Testing => test_iters,
            },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), AcoError> {
        if self.n_ants == 0 {
            return Err(AcoError::InvalidParams("n_ants must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(AcoError::InvalidParams("rho must lie in [0, 1)"));
        }
        if !(self.tau_init > 0.0 && self.tau_floor > 0.0) {
            return Err(AcoError::InvalidParams("pheromone init and floor must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AcoError {
    InvalidParams(&'static str),
    /// `eta` does not match the component structure of the instance.
    ShapeMismatch { expected: (usize, usize), got: (usize, usize) },
    NonFiniteGuidance,
    /// Construction could not extend a partial solution.
    Stuck,
}

impl fmt::Display for AcoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcoError::InvalidParams(s) => write!(f, "invalid ACO parameters: {s}"),
            AcoError::ShapeMismatch { expected, got } => write!(
                f,
                "heuristic shape {}x{} does not match expected {}x{}",
                got.0, got.1, expected.0, expected.1
            ),
            AcoError::NonFiniteGuidance => f.write_str("heuristic contains non-finite values"),
            AcoError::Stuck => f.write_str("no feasible continuation during construction"),
        }
    }
}

/// Pheromone levels over the components of one instance. Always positive.
#[derive(Clone, Debug, PartialEq)]
pub struct PheromoneState {
    tau: Vec<f64>,
}

impl PheromoneState {
    pub fn new(instance: &CopInstance, init: f64) -> Self {
        let n = instance.size();
        let len = if instance.kind() == ProblemKind::Mkp { n } else { n * n };
        Self {
            tau: vec![init; len],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.tau
    }

    /// Entry for edge or item pair `(i, j)` of an `n x n` structure.
    pub fn edge(&self, n: usize, i: usize, j: usize) -> f64 {
        self.tau[i * n + j]
    }

    pub fn from_values(tau: Vec<f64>) -> Self {
        Self { tau }
    }
}

/// Shape `eta` must have for `instance`.
pub fn expected_shape(instance: &CopInstance) -> (usize, usize) {
    let n = instance.size();
    match instance.kind() {
        ProblemKind::Mkp => (n, 1),
        _ => (n, n),
    }
}

fn eta_values<'a>(instance: &CopInstance, eta: &'a Guidance) -> Result<&'a [f64], AcoError> {
    let expected = expected_shape(instance);
    let (values, got) = match eta {
        Guidance::Matrix(m) => (m.as_slice(), m.shape()),
        Guidance::Vector(v) => (v.as_slice(), (v.len(), 1)),
    };
    let shape_ok = match instance.kind() {
        ProblemKind::Mkp => values.len() == expected.0,
        _ => matches!(eta, Guidance::Matrix(_)) && got == expected,
    };
    if !shape_ok {
        return Err(AcoError::ShapeMismatch { expected, got });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AcoError::NonFiniteGuidance);
    }
    Ok(values)
}

/// Normalized selection probabilities for raw candidate weights.
///
/// Zero-weight candidates get probability 0 unless all weights are zero,
/// in which case the distribution is uniform.
pub fn transition_probabilities(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    if total > 0.0 && total.is_finite() {
        weights.iter().map(|w| w / total).collect()
    } else {
        let u = 1.0 / weights.len() as f64;
        vec![u; weights.len()]
    }
}

/// Samples an index of `weights` following [`transition_probabilities`].
fn sample(weights: &[f64], rng: &mut Rng) -> usize {
    debug_assert!(!weights.is_empty());
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return rng.random_range(0..weights.len());
    }
    let r = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if acc > r {
                return i;
            }
        }
    }
    last_positive
}

/// `tau^alpha * eta^beta` for every component.
fn combined_weights(tau: &[f64], eta: &[f64], params: &AcoParams) -> Vec<f64> {
    tau.iter()
        .zip(eta)
        .map(|(&t, &e)| math::pow(t, params.alpha) * math::pow(e.max(0.0), params.beta))
        .collect()
}

/// Builds one feasible solution guided by `tau` and `eta`.
pub fn construct_solution(
    instance: &CopInstance,
    tau: &PheromoneState,
    eta: &Guidance,
    params: &AcoParams,
    rng: &mut Rng,
) -> Result<Solution, AcoError> {
    let eta = eta_values(instance, eta)?;
    let weights = combined_weights(&tau.tau, eta, params);
    Ok(construct_with(instance, &tau.tau, eta, &weights, params, rng))
}

fn construct_with(
    instance: &CopInstance,
    tau: &[f64],
    eta: &[f64],
    weights: &[f64],
    params: &AcoParams,
    rng: &mut Rng,
) -> Solution {
    let n = instance.size();
    let mut buf = Vec::with_capacity(n);
    match instance.payload() {
        Payload::Tsp { .. } => {
            let start = rng.random_range(0..n);
            let mut unvisited: Vec<usize> = (0..n).filter(|&v| v != start).collect();
            let mut tour = Vec::with_capacity(n);
            tour.push(start);
            let mut cur = start;
            while !unvisited.is_empty() {
                buf.clear();
                let row = &weights[cur * n..(cur + 1) * n];
                buf.extend(unvisited.iter().map(|&j| row[j]));
                let k = sample(&buf, rng);
                cur = unvisited.swap_remove(k);
                tour.push(cur);
            }
            Solution::Tour(tour)
        }
        Payload::Cvrp {
            demands, capacity, ..
        } => {
            let mut unvisited: Vec<usize> = (1..n).collect();
            let mut routes = Vec::new();
            let mut route = Vec::new();
            let mut load = 0.0;
            let mut cur = 0;
            let mut cands = Vec::with_capacity(n);
            while !unvisited.is_empty() {
                cands.clear();
                cands.extend(
                    unvisited
                        .iter()
                        .enumerate()
                        .filter(|(_, &j)| load + demands[j] <= *capacity)
                        .map(|(k, _)| k),
                );
                let allow_depot = cur != 0;
                buf.clear();
                let row = &weights[cur * n..(cur + 1) * n];
                buf.extend(cands.iter().map(|&k| row[unvisited[k]]));
                if allow_depot {
                    buf.push(row[0]);
                }
                // Every demand fits an empty vehicle, so the depot always has
                // a customer to serve and a customer can always return.
                let pick = sample(&buf, rng);
                if pick == cands.len() {
                    routes.push(core::mem::take(&mut route));
                    load = 0.0;
                    cur = 0;
                } else {
                    let j = unvisited.swap_remove(cands[pick]);
                    load += demands[j];
                    route.push(j);
                    cur = j;
                }
            }
            if !route.is_empty() {
                routes.push(route);
            }
            Solution::Routes(routes)
        }
        Payload::Op { max_length, .. } => {
            let dist = instance.distances().expect("routing instance");
            let mut unvisited: Vec<usize> = (1..n).collect();
            let mut path = Vec::new();
            let mut length = 0.0;
            let mut cur = 0;
            let mut cands = Vec::with_capacity(n);
            loop {
                cands.clear();
                cands.extend(
                    unvisited
                        .iter()
                        .enumerate()
                        .filter(|(_, &j)| length + dist[(cur, j)] + dist[(j, 0)] <= *max_length)
                        .map(|(k, _)| k),
                );
                if cands.is_empty() {
                    break;
                }
                buf.clear();
                let row = &weights[cur * n..(cur + 1) * n];
                buf.extend(cands.iter().map(|&k| row[unvisited[k]]));
                let k = cands[sample(&buf, rng)];
                let j = unvisited.swap_remove(k);
                length += dist[(cur, j)];
                path.push(j);
                cur = j;
            }
            Solution::OpTour(path)
        }
        Payload::Mkp {
            weights: item_weights,
            capacities,
            ..
        } => {
            let m = capacities.len();
            let mut remaining = capacities.clone();
            let fits = |j: usize, rem: &[f64]| (0..m).all(|k| item_weights[(k, j)] <= rem[k]);
            let mut cands: Vec<usize> = (0..n).filter(|&j| fits(j, &remaining)).collect();
            let mut chosen = Vec::new();
            while !cands.is_empty() {
                buf.clear();
                buf.extend(cands.iter().map(|&j| weights[j]));
                let j = cands.swap_remove(sample(&buf, rng));
                for (k, rem) in remaining.iter_mut().enumerate() {
                    *rem -= item_weights[(k, j)];
                }
                chosen.push(j);
                cands.retain(|&c| fits(c, &remaining));
            }
            chosen.sort_unstable();
            Solution::Selection(chosen)
        }
        Payload::Bpp { sizes, capacity } => {
            let mut unpacked: Vec<usize> = (0..n).collect();
            let mut bins = Vec::new();
            let mut tau_sum = vec![0.0; n];
            let mut eta_sum = vec![0.0; n];
            let mut cands = Vec::with_capacity(n);
            while !unpacked.is_empty() {
                // Open with the largest item (lowest index on ties).
                let (pos, _) = unpacked
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |(bp, bs), (p, &i)| {
                        if sizes[i] > bs {
                            (p, sizes[i])
                        } else {
                            (bp, bs)
                        }
                    });
                let first = unpacked.remove(pos);
                let mut bin = vec![first];
                let mut free = *capacity - sizes[first];
                tau_sum.copy_from_slice(&tau[first * n..(first + 1) * n]);
                eta_sum.copy_from_slice(&eta[first * n..(first + 1) * n]);
                loop {
                    cands.clear();
                    cands.extend(
                        unpacked
                            .iter()
                            .enumerate()
                            .filter(|(_, &c)| sizes[c] <= free)
                            .map(|(k, _)| k),
                    );
                    if cands.is_empty() {
                        break;
                    }
                    buf.clear();
                    buf.extend(cands.iter().map(|&k| {
                        let c = unpacked[k];
                        math::pow(tau_sum[c], params.alpha)
                            * math::pow(eta_sum[c].max(0.0), params.beta)
                    }));
                    let k = cands[sample(&buf, rng)];
                    let item = unpacked.remove(k);
                    free -= sizes[item];
                    bin.push(item);
                    let trow = &tau[item * n..(item + 1) * n];
                    let erow = &eta[item * n..(item + 1) * n];
                    for c in 0..n {
                        tau_sum[c] += trow[c];
                        eta_sum[c] += erow[c];
                    }
                }
                bins.push(bin);
            }
            Solution::Bins(bins)
        }
    }
}

/// Amount a solution deposits on each of its components.
fn deposit_amount(direction: Direction, objective: f64, q: f64) -> f64 {
    match direction {
        Direction::Minimize if objective > 0.0 => q / objective,
        Direction::Minimize => 0.0,
        Direction::Maximize => q * objective,
    }
}

fn deposit(tau: &mut [f64], n: usize, solution: &Solution, amount: f64) {
    let mut edge = |a: usize, b: usize| {
        tau[a * n + b] += amount;
        tau[b * n + a] += amount;
    };
    match solution {
        Solution::Tour(t) => {
            for w in t.windows(2) {
                edge(w[0], w[1]);
            }
            if t.len() > 1 {
                edge(t[t.len() - 1], t[0]);
            }
        }
        Solution::Routes(routes) => {
            for r in routes {
                let mut prev = 0;
                for &v in r {
                    edge(prev, v);
                    prev = v;
                }
                edge(prev, 0);
            }
        }
        Solution::OpTour(path) => {
            let mut prev = 0;
            for &v in path {
                edge(prev, v);
                prev = v;
            }
            if !path.is_empty() {
                edge(prev, 0);
            }
        }
        Solution::Selection(items) => {
            for &j in items {
                tau[j] += amount;
            }
        }
        Solution::Bins(bins) => {
            for bin in bins {
                for (x, &a) in bin.iter().enumerate() {
                    for &b in &bin[x + 1..] {
                        edge(a, b);
                    }
                }
            }
        }
    }
}

/// Evaporates, then lets the depositing solutions (per `params.deposit`)
/// reinforce their components; entries are floored at `params.tau_floor`.
///
/// `solutions` must be non-empty and hold feasible solutions with their
/// objectives.
pub fn update_pheromone(
    tau: &mut PheromoneState,
    instance: &CopInstance,
    solutions: &[(Solution, f64)],
    params: &AcoParams,
) {
    let n = instance.size();
    let direction = instance.direction();
    for t in tau.tau.iter_mut() {
        *t *= 1.0 - params.rho;
    }
    match params.deposit {
        DepositRule::IterationBest => {
            if let Some((best, obj)) = solutions
                .iter()
                .reduce(|a, b| if direction.better(b.1, a.1) { b } else { a })
            {
                deposit(&mut tau.tau, n, best, deposit_amount(direction, *obj, params.q));
            }
        }
        DepositRule::AllAnts => {
            for (s, obj) in solutions {
                deposit(&mut tau.tau, n, s, deposit_amount(direction, *obj, params.q));
            }
        }
    }
    for t in tau.tau.iter_mut() {
        if t.is_nan() || *t < params.tau_floor {
            *t = params.tau_floor;
        }
    }
}

/// Result of a full ACO run.
#[derive(Clone, Debug, PartialEq)]
pub struct AcoRun {
    /// Best-so-far objective after each iteration.
    pub trajectory: Vec<f64>,
    pub best: Solution,
    pub best_objective: f64,
}

/// Runs `params.n_iterations` iterations of construction and pheromone
/// update. Deterministic in `params.seed`.
pub fn run_aco(instance: &CopInstance, eta: &Guidance, params: &AcoParams) -> Result<AcoRun, AcoError> {
    run_aco_observed(instance, eta, params, |_, _| {})
}

/// [`run_aco`] with a callback receiving the iteration index and the
/// pheromone state after each update.
pub fn run_aco_observed(
    instance: &CopInstance,
    eta: &Guidance,
    params: &AcoParams,
    mut observe: impl FnMut(usize, &PheromoneState),
) -> Result<AcoRun, AcoError> {
    params.validate()?;
    let eta = eta_values(instance, eta)?;
    let direction = instance.direction();
    let mut rng = rng::stream(params.seed, 0);
    let mut tau = PheromoneState::new(instance, params.tau_init);
    let mut trajectory = Vec::with_capacity(params.n_iterations);
    let mut best: Option<(Solution, f64)> = None;
    let mut batch = Vec::with_capacity(params.n_ants);
    for iter in 0..params.n_iterations {
        let weights = combined_weights(&tau.tau, eta, params);
        batch.clear();
        for _ in 0..params.n_ants {
            let s = construct_with(instance, &tau.tau, eta, &weights, params, &mut rng);
            let obj = objective_unchecked(instance, &s);
            batch.push((s, obj));
        }
        for (s, obj) in &batch {
            if best.as_ref().is_none_or(|(_, b)| direction.better(*obj, *b)) {
                best = Some((s.clone(), *obj));
            }
        }
        trajectory.push(best.as_ref().map_or(f64::NAN, |b| b.1));
        update_pheromone(&mut tau, instance, &batch, params);
        observe(iter, &tau);
    }
    let (best, best_objective) = match best {
        Some(b) => b,
        // Zero iterations: one construction so a solution is always returned.
        None => {
            let weights = combined_weights(&tau.tau, eta, params);
            let s = construct_with(instance, &tau.tau, eta, &weights, params, &mut rng);
            let obj = objective_unchecked(instance, &s);
            (s, obj)
        }
    };
    Ok(AcoRun {
        trajectory,
        best,
        best_objective,
    })
}

/// The classical heuristic: `1/d` for routing kinds (zero on the diagonal),
/// value over total weight for MKP and `size_i + size_j` fill for BPP.
pub fn vanilla_heuristic(instance: &CopInstance) -> Guidance {
    let n = instance.size();
    match instance.payload() {
        Payload::Tsp { .. } | Payload::Cvrp { .. } | Payload::Op { .. } => {
            let d = instance.distances().expect("routing instance");
            Guidance::Matrix(Matrix::from_fn(n, n, |i, j| {
                if i == j || d[(i, j)] <= 0.0 {
                    0.0
                } else {
                    1.0 / d[(i, j)]
                }
            }))
        }
        Payload::Mkp { values, weights, .. } => Guidance::Vector(
            (0..n)
                .map(|j| {
                    let w: f64 = (0..weights.rows()).map(|k| weights[(k, j)]).sum();
                    if w > 0.0 {
                        values[j] / w
                    } else {
                        0.0
                    }
                })
                .collect(),
        ),
        Payload::Bpp { sizes, capacity } => Guidance::Matrix(Matrix::from_fn(n, n, |i, j| {
            let fill = sizes[i] + sizes[j];
            if i != j && fill <= *capacity {
                fill / capacity
            } else {
                0.0
            }
        })),
    }
}
