//! The five combinatorial problems, their instance generators and objectives.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::math;
use crate::matrix::Matrix;
use crate::rng;

/// Bin capacity used for every generated bin-packing instance.
pub const BPP_CAPACITY: f64 = 150.0;
/// Inclusive item size range for bin packing.
pub const BPP_ITEM_RANGE: (u32, u32) = (20, 100);
/// Fixed CVRP depot location.
pub const CVRP_DEPOT: [f64; 2] = [0.5, 0.5];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Tsp,
    Cvrp,
    Op,
    Mkp,
    Bpp,
}

/// Optimization direction of a problem's objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    /// Maps a raw objective to a "higher is better" score.
    #[inline]
    pub fn orient(self, objective: f64) -> f64 {
        match self {
            Direction::Minimize => -objective,
            Direction::Maximize => objective,
        }
    }

    /// Whether `a` is strictly better than `b` in this direction.
    #[inline]
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Minimize => a < b,
            Direction::Maximize => a > b,
        }
    }
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::Tsp,
        ProblemKind::Cvrp,
        ProblemKind::Op,
        ProblemKind::Mkp,
        ProblemKind::Bpp,
    ];

    pub fn direction(self) -> Direction {
        match self {
            ProblemKind::Tsp | ProblemKind::Cvrp | ProblemKind::Bpp => Direction::Minimize,
            ProblemKind::Op | ProblemKind::Mkp => Direction::Maximize,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Tsp => "tsp",
            ProblemKind::Cvrp => "cvrp",
            ProblemKind::Op => "op",
            ProblemKind::Mkp => "mkp",
            ProblemKind::Bpp => "bpp",
        }
    }

    /// Whether instances carry node coordinates and a distance matrix.
    pub fn is_routing(self) -> bool {
        matches!(self, ProblemKind::Tsp | ProblemKind::Cvrp | ProblemKind::Op)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tsp" => Ok(ProblemKind::Tsp),
            "cvrp" => Ok(ProblemKind::Cvrp),
            "op" => Ok(ProblemKind::Op),
            "mkp" => Ok(ProblemKind::Mkp),
            "bpp" => Ok(ProblemKind::Bpp),
            _ => Err(InstanceError::UnknownKind(s.into())),
        }
    }
}

/// Kind-specific instance data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Tsp {
        coordinates: Vec<[f64; 2]>,
    },
    /// Node 0 is the depot and has zero demand.
    Cvrp {
        coordinates: Vec<[f64; 2]>,
        demands: Vec<f64>,
        capacity: f64,
    },
    /// Node 0 is the depot.
    Op {
        coordinates: Vec<[f64; 2]>,
        prizes: Vec<f64>,
        max_length: f64,
    },
    /// `weights` is `m x n`: one row per knapsack constraint.
    Mkp {
        values: Vec<f64>,
        weights: Matrix,
        capacities: Vec<f64>,
    },
    Bpp {
        sizes: Vec<f64>,
        capacity: f64,
    },
}

impl Payload {
    pub fn kind(&self) -> ProblemKind {
        match self {
            Payload::Tsp { .. } => ProblemKind::Tsp,
            Payload::Cvrp { .. } => ProblemKind::Cvrp,
            Payload::Op { .. } => ProblemKind::Op,
            Payload::Mkp { .. } => ProblemKind::Mkp,
            Payload::Bpp { .. } => ProblemKind::Bpp,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Payload::Tsp { coordinates }
            | Payload::Cvrp { coordinates, .. }
            | Payload::Op { coordinates, .. } => coordinates.len(),
            Payload::Mkp { values, .. } => values.len(),
            Payload::Bpp { sizes, .. } => sizes.len(),
        }
    }

    pub fn coordinates(&self) -> Option<&[[f64; 2]]> {
        match self {
            Payload::Tsp { coordinates }
            | Payload::Cvrp { coordinates, .. }
            | Payload::Op { coordinates, .. } => Some(coordinates),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceError {
    UnknownKind(String),
    TooSmall { kind: ProblemKind, size: usize },
    /// OP sizes without a tabulated length budget need an explicit one.
    UnsupportedSize { kind: ProblemKind, size: usize },
    Invalid(String),
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceError::UnknownKind(s) => write!(f, "unknown problem kind `{s}`"),
            InstanceError::TooSmall { kind, size } => {
                write!(f, "{kind} instance of size {size} is too small (need at least 2)")
            }
            InstanceError::UnsupportedSize { kind, size } => write!(
                f,
                "no default parameters for {kind} of size {size}; supply them explicitly"
            ),
            InstanceError::Invalid(s) => write!(f, "invalid instance: {s}"),
        }
    }
}

/// Knobs of the instance generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    /// Exponent `k` of the OP prize distribution.
    pub op_prize_exponent: f64,
    /// Explicit OP length budget; required for sizes without a default.
    pub op_max_length: Option<f64>,
    /// Number of knapsack constraints for MKP.
    pub mkp_knapsacks: usize,
    pub cvrp_capacity: f64,
    /// Inclusive integer demand range for CVRP customers.
    pub cvrp_demand_range: (u32, u32),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            op_prize_exponent: 2.0,
            op_max_length: None,
            mkp_knapsacks: 5,
            cvrp_capacity: 50.0,
            cvrp_demand_range: (1, 9),
        }
    }
}

/// Default OP tour-length budget for the tabulated sizes.
pub fn op_default_max_length(size: usize) -> Option<f64> {
    match size {
        50 => Some(3.0),
        100 => Some(4.0),
        200 => Some(5.0),
        500 => Some(8.0),
        1000 => Some(12.0),
        _ => None,
    }
}

/// An immutable problem instance with its distance matrix precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct CopInstance {
    seed: u64,
    index: u64,
    payload: Payload,
    distances: Option<Matrix>,
}

impl CopInstance {
    /// Wraps a payload, checking every kind invariant.
    pub fn new(payload: Payload, seed: u64, index: u64) -> Result<Self, InstanceError> {
        validate(&payload)?;
        let distances = payload.coordinates().map(distance_matrix);
        Ok(Self {
            seed,
            index,
            payload,
            distances,
        })
    }

    pub fn kind(&self) -> ProblemKind {
        self.payload.kind()
    }

    pub fn size(&self) -> usize {
        self.payload.size()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    /// Euclidean distance matrix for routing kinds.
    pub fn distances(&self) -> Option<&Matrix> {
        self.distances.as_ref()
    }

    pub fn direction(&self) -> Direction {
        self.kind().direction()
    }
}

pub fn distance_matrix(coordinates: &[[f64; 2]]) -> Matrix {
    let n = coordinates.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = math::hypot(
                coordinates[i][0] - coordinates[j][0],
                coordinates[i][1] - coordinates[j][1],
            );
            m[(i, j)] = d;
            m[(j, i)] = d;
        }
    }
    m
}

fn uniform_points(rng: &mut rng::Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
}

/// Generates instance `index` of the family keyed by `seed`.
///
/// The result is a pure function of its arguments; the generator stream is
/// [`rng::stream`]`(seed, index)`.
pub fn generate_instance(
    kind: ProblemKind,
    size: usize,
    seed: u64,
    index: u64,
    config: &GeneratorConfig,
) -> Result<CopInstance, InstanceError> {
    if size < 2 {
        return Err(InstanceError::TooSmall { kind, size });
    }
    let mut rng = rng::stream(seed, index);
    let payload = match kind {
        ProblemKind::Tsp => Payload::Tsp {
            coordinates: uniform_points(&mut rng, size),
        },
        ProblemKind::Cvrp => {
            let mut coordinates = Vec::with_capacity(size);
            coordinates.push(CVRP_DEPOT);
            coordinates.extend(uniform_points(&mut rng, size - 1));
            let (lo, hi) = config.cvrp_demand_range;
            let mut demands = vec![0.0];
            demands.extend((1..size).map(|_| f64::from(rng.random_range(lo..=hi))));
            Payload::Cvrp {
                coordinates,
                demands,
                capacity: config.cvrp_capacity,
            }
        }
        ProblemKind::Op => {
            let max_length = match config.op_max_length {
                Some(l) => l,
                None => op_default_max_length(size)
                    .ok_or(InstanceError::UnsupportedSize { kind, size })?,
            };
            let coordinates = uniform_points(&mut rng, size);
            let prizes = op_prizes(&coordinates, config.op_prize_exponent);
            Payload::Op {
                coordinates,
                prizes,
                max_length,
            }
        }
        ProblemKind::Mkp => {
            let m = config.mkp_knapsacks.max(1);
            let values: Vec<f64> = (0..size).map(|_| rng.random::<f64>()).collect();
            let weights = Matrix::from_fn(m, size, |_, _| rng.random::<f64>());
            let capacities = (0..m)
                .map(|i| {
                    let row = weights.row(i);
                    let lo = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let hi: f64 = row.iter().sum();
                    loop {
                        let c = lo + (hi - lo) * rng.random::<f64>();
                        if c > lo && c < hi {
                            break c;
                        }
                    }
                })
                .collect();
            Payload::Mkp {
                values,
                weights,
                capacities,
            }
        }
        ProblemKind::Bpp => {
            let (lo, hi) = BPP_ITEM_RANGE;
            Payload::Bpp {
                sizes: (0..size)
                    .map(|_| f64::from(rng.random_range(lo..=hi)))
                    .collect(),
                capacity: BPP_CAPACITY,
            }
        }
    };
    CopInstance::new(payload, seed, index)
}

/// `p_i = (1 + (i/99) * (d_0i / max_j d_0j)^k) / 100`, indexed by node id.
pub fn op_prizes(coordinates: &[[f64; 2]], exponent: f64) -> Vec<f64> {
    let depot = coordinates[0];
    let d0: Vec<f64> = coordinates
        .iter()
        .map(|c| math::hypot(c[0] - depot[0], c[1] - depot[1]))
        .collect();
    let max_d = d0[1..].iter().copied().fold(0.0, f64::max);
    d0.iter()
        .enumerate()
        .map(|(i, &d)| {
            let ratio = if max_d > 0.0 { d / max_d } else { 0.0 };
            (1.0 + (i as f64 / 99.0) * math::pow(ratio, exponent)) / 100.0
        })
        .collect()
}

fn validate(payload: &Payload) -> Result<(), InstanceError> {
    let invalid = |s: &str| Err(InstanceError::Invalid(s.into()));
    let n = payload.size();
    if n < 2 {
        return Err(InstanceError::TooSmall {
            kind: payload.kind(),
            size: n,
        });
    }
    if let Some(coords) = payload.coordinates() {
        if coords
            .iter()
            .any(|c| !(0.0..=1.0).contains(&c[0]) || !(0.0..=1.0).contains(&c[1]))
        {
            return invalid("coordinates must lie in the unit square");
        }
    }
    match payload {
        Payload::Tsp { .. } => {}
        Payload::Cvrp {
            coordinates,
            demands,
            capacity,
        } => {
            if coordinates[0] != CVRP_DEPOT {
                return invalid("CVRP depot must be at (0.5, 0.5)");
            }
            if demands.len() != n || demands[0] != 0.0 {
                return invalid("CVRP demands must have one entry per node with demand[0] = 0");
            }
            if demands[1..].iter().any(|&d| !(d > 0.0 && d <= *capacity)) {
                return invalid("CVRP customer demands must lie in (0, capacity]");
            }
        }
        Payload::Op {
            prizes, max_length, ..
        } => {
            if prizes.len() != n || prizes.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
                return invalid("OP prizes must lie in (0, 1]");
            }
            if !(*max_length > 0.0 && max_length.is_finite()) {
                return invalid("OP length budget must be positive");
            }
        }
        Payload::Mkp {
            values,
            weights,
            capacities,
        } => {
            if weights.cols() != values.len() || weights.rows() != capacities.len() {
                return invalid("MKP weight matrix must be m x n");
            }
            for (i, &c) in capacities.iter().enumerate() {
                let row = weights.row(i);
                let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = row.iter().sum();
                if !(c > max && c < sum) {
                    return invalid("MKP capacity must lie strictly between max and total weight");
                }
            }
        }
        Payload::Bpp { sizes, capacity } => {
            if sizes.iter().any(|&s| !(s > 0.0 && s <= *capacity)) {
                return invalid("BPP item sizes must lie in (0, capacity]");
            }
        }
    }
    Ok(())
}

/// A solution in the representation matching its instance kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solution {
    /// Permutation of all nodes; the closing edge is implicit.
    Tour(Vec<usize>),
    /// Customer sequences; each route starts and ends at depot 0.
    Routes(Vec<Vec<usize>>),
    /// Visited non-depot nodes in order; the tour starts and ends at depot 0.
    OpTour(Vec<usize>),
    /// Indices of the packed items; the selection must respect every
    /// knapsack constraint.
    Selection(Vec<usize>),
    /// Items per bin.
    Bins(Vec<Vec<usize>>),
}

/// Reason a solution is rejected.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    WrongKind,
    IndexOutOfRange(usize),
    Duplicate(usize),
    Missing(usize),
    DepotInRoute,
    EmptyRoute,
    CapacityExceeded { route: usize, load: f64, capacity: f64 },
    LengthBudgetExceeded { length: f64, budget: f64 },
    KnapsackOverweight { knapsack: usize, load: f64, capacity: f64 },
    BinOverfull { bin: usize, load: f64, capacity: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongKind => f.write_str("solution representation does not match instance kind"),
            Violation::IndexOutOfRange(i) => write!(f, "index {i} out of range"),
            Violation::Duplicate(i) => write!(f, "node or item {i} used more than once"),
            Violation::Missing(i) => write!(f, "node or item {i} not assigned"),
            Violation::DepotInRoute => f.write_str("depot listed inside a route"),
            Violation::EmptyRoute => f.write_str("empty route or bin"),
            Violation::CapacityExceeded { route, load, capacity } => {
                write!(f, "vehicle capacity exceeded on route {route}: {load} > {capacity}")
            }
            Violation::LengthBudgetExceeded { length, budget } => {
                write!(f, "length budget exceeded: {length} > {budget}")
            }
            Violation::KnapsackOverweight { knapsack, load, capacity } => {
                write!(f, "knapsack {knapsack} overweight: {load} > {capacity}")
            }
            Violation::BinOverfull { bin, load, capacity } => {
                write!(f, "bin {bin} overfull: {load} > {capacity}")
            }
        }
    }
}

/// Closed-tour length under `dist`.
pub fn tour_length(dist: &Matrix, tour: &[usize]) -> f64 {
    if tour.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for w in tour.windows(2) {
        total += dist[(w[0], w[1])];
    }
    total + dist[(tour[tour.len() - 1], tour[0])]
}

/// Length of depot -> path -> depot.
pub fn depot_path_length(dist: &Matrix, path: &[usize]) -> f64 {
    let mut prev = 0;
    let mut total = 0.0;
    for &v in path {
        total += dist[(prev, v)];
        prev = v;
    }
    total + dist[(prev, 0)]
}

fn mark(seen: &mut [bool], i: usize) -> Result<(), Violation> {
    match seen.get_mut(i) {
        None => Err(Violation::IndexOutOfRange(i)),
        Some(true) => Err(Violation::Duplicate(i)),
        Some(s) => {
            *s = true;
            Ok(())
        }
    }
}

fn all_seen(seen: &[bool], from: usize) -> Result<(), Violation> {
    match seen.iter().skip(from).position(|s| !s) {
        Some(p) => Err(Violation::Missing(p + from)),
        None => Ok(()),
    }
}

/// Checks every constraint of the instance kind. Capacity and budget
/// limits are inclusive.
pub fn check_feasible(instance: &CopInstance, solution: &Solution) -> Result<(), Violation> {
    let n = instance.size();
    let mut seen = vec![false; n];
    match (instance.payload(), solution) {
        (Payload::Tsp { .. }, Solution::Tour(tour)) => {
            for &v in tour {
                mark(&mut seen, v)?;
            }
            all_seen(&seen, 0)
        }
        (Payload::Cvrp { demands, capacity, .. }, Solution::Routes(routes)) => {
            seen[0] = true;
            for (r, route) in routes.iter().enumerate() {
                if route.is_empty() {
                    return Err(Violation::EmptyRoute);
                }
                let mut load = 0.0;
                for &v in route {
                    if v == 0 {
                        return Err(Violation::DepotInRoute);
                    }
                    mark(&mut seen, v)?;
                    load += demands[v];
                }
                if load > *capacity {
                    return Err(Violation::CapacityExceeded {
                        route: r,
                        load,
                        capacity: *capacity,
                    });
                }
            }
            all_seen(&seen, 1)
        }
        (Payload::Op { max_length, .. }, Solution::OpTour(path)) => {
            seen[0] = true;
            for &v in path {
                if v == 0 {
                    return Err(Violation::DepotInRoute);
                }
                mark(&mut seen, v)?;
            }
            let dist = instance.distances().expect("routing instance");
            let length = depot_path_length(dist, path);
            if length > *max_length {
                return Err(Violation::LengthBudgetExceeded {
                    length,
                    budget: *max_length,
                });
            }
            Ok(())
        }
        (
            Payload::Mkp {
                weights,
                capacities,
                ..
            },
            Solution::Selection(items),
        ) => {
            for &v in items {
                mark(&mut seen, v)?;
            }
            for (k, &cap) in capacities.iter().enumerate() {
                let row = weights.row(k);
                let load: f64 = items.iter().map(|&v| row[v]).sum();
                if load > cap {
                    return Err(Violation::KnapsackOverweight {
                        knapsack: k,
                        load,
                        capacity: cap,
                    });
                }
            }
            Ok(())
        }
        (Payload::Bpp { sizes, capacity }, Solution::Bins(bins)) => {
            for (b, bin) in bins.iter().enumerate() {
                if bin.is_empty() {
                    return Err(Violation::EmptyRoute);
                }
                let mut load = 0.0;
                for &v in bin {
                    mark(&mut seen, v)?;
                    load += sizes[v];
                }
                if load > *capacity {
                    return Err(Violation::BinOverfull {
                        bin: b,
                        load,
                        capacity: *capacity,
                    });
                }
            }
            all_seen(&seen, 0)
        }
        _ => Err(Violation::WrongKind),
    }
}

/// Boolean form of [`check_feasible`] with the violation text.
pub fn feasible(instance: &CopInstance, solution: &Solution) -> (bool, Option<String>) {
    match check_feasible(instance, solution) {
        Ok(()) => (true, None),
        Err(v) => (false, Some(alloc::format!("{v}"))),
    }
}

/// Raw objective: route length (TSP, CVRP), collected prize (OP), packed
/// value (MKP) or bins used (BPP).
pub fn objective(instance: &CopInstance, solution: &Solution) -> Result<f64, Violation> {
    check_feasible(instance, solution)?;
    Ok(objective_unchecked(instance, solution))
}

/// Objective of a solution already known to be feasible.
pub(crate) fn objective_unchecked(instance: &CopInstance, solution: &Solution) -> f64 {
    match (instance.payload(), solution) {
        (Payload::Tsp { .. }, Solution::Tour(t)) => {
            tour_length(instance.distances().expect("routing instance"), t)
        }
        (Payload::Cvrp { .. }, Solution::Routes(routes)) => {
            let dist = instance.distances().expect("routing instance");
            routes.iter().map(|r| depot_path_length(dist, r)).sum()
        }
        (Payload::Op { prizes, .. }, Solution::OpTour(path)) => path.iter().map(|&v| prizes[v]).sum(),
        (Payload::Mkp { values, .. }, Solution::Selection(items)) => {
            items.iter().map(|&v| values[v]).sum()
        }
        (Payload::Bpp { .. }, Solution::Bins(bins)) => bins.len() as f64,
        _ => f64::NAN,
    }
}
