//! Reference heuristic corpus with native evaluators.
//!
//! Every entry carries its Python source (as an external worker would run
//! it) and a native port that computes the same array, so evaluations can
//! run in-process and deterministically. [`Family`] templates describe
//! parameterized variants whose constants are recovered from the source text.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::exec::{ExecRequest, ExecResponse, HeuristicRunner};
use crate::heuristic::{normalize_source, source_hash, ArgValue, Failure, Framework, Setting};
use crate::math;
use crate::matrix::Matrix;
use crate::problem::ProblemKind;

type NativeFn = fn(&[ArgValue]) -> Result<ArgValue, Failure>;
type FamilyFn = fn(&[ArgValue], f64, f64) -> Result<ArgValue, Failure>;

/// Whether an entry is a tuned heuristic or the classical baseline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tier {
    Best,
    Vanilla,
}

pub struct CorpusEntry {
    pub name: &'static str,
    pub kind: ProblemKind,
    pub setting: Setting,
    pub framework: Framework,
    pub tier: Tier,
    pub description: &'static str,
    pub source: &'static str,
    native: NativeFn,
}

impl CorpusEntry {
    pub fn evaluate(&self, args: &[ArgValue]) -> Result<ArgValue, Failure> {
        (self.native)(args)
    }
}

impl core::fmt::Debug for CorpusEntry {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CorpusEntry").field("name", &self.name).finish()
    }
}

macro_rules! entry {
    ($name:literal, $kind:ident, $setting:ident, $fw:ident, $tier:ident, $desc:literal, $file:literal, $f:expr) => {
        CorpusEntry {
            name: $name,
            kind: ProblemKind::$kind,
            setting: Setting::$setting,
            framework: Framework::$fw,
            tier: Tier::$tier,
            description: $desc,
            source: include_str!(concat!("../corpus/", $file)),
            native: $f,
        }
    };
}

static CATALOGUE: &[CorpusEntry] = &[
    entry!("tsp-white", Tsp, WhiteBox, Aco, Best,
        "Inverse-cube distance scaled by a nearer-row count penalty, row-normalized.",
        "tsp_white.py", tsp_white),
    entry!("tsp-black", Tsp, BlackBox, Aco, Best,
        "Squared inverse of the min-shifted squared edge attribute.",
        "tsp_black.py", tsp_black),
    entry!("op-white", Op, WhiteBox, Aco, Best,
        "Prize-to-distance scores kept greedily per row within the length budget.",
        "op_white.py", op_white),
    entry!("op-black", Op, BlackBox, Aco, Best,
        "Attribute-weighted inverse edge powers with adaptive column thresholds.",
        "op_black.py", op_black),
    entry!("cvrp-white", Cvrp, WhiteBox, Aco, Best,
        "Inverse squared distance with demand penalties and a clustering bonus.",
        "cvrp_white.py", cvrp_white),
    entry!("cvrp-black", Cvrp, BlackBox, Aco, Best,
        "Damped iterative reweighting of cube-root node attributes over squared edges.",
        "cvrp_black.py", cvrp_black),
    entry!("mkp-white", Mkp, WhiteBox, Aco, Best,
        "Efficiency times diversity times weight-profile synergy.",
        "mkp_white.py", mkp_white),
    entry!("mkp-black", Mkp, BlackBox, Aco, Best,
        "Squared value-per-peak-weight ratio normalized by total weight.",
        "mkp_black.py", mkp_black),
    entry!("bpp-white", Bpp, WhiteBox, Aco, Best,
        "Pair scores inside first-fit-decreasing bins, favouring tight fills.",
        "bpp_white.py", bpp_white),
    entry!("bpp-black", Bpp, BlackBox, Aco, Best,
        "Fill attractiveness weighted by one-dimensional size clusters.",
        "bpp_black.py", bpp_black),
    entry!("tsp-gls", Tsp, WhiteBox, Gls, Best,
        "Edge length relative to the summed row lengths of its endpoints.",
        "tsp_gls.py", tsp_gls),
    entry!("tsp-white-vanilla", Tsp, WhiteBox, Aco, Vanilla,
        "Inverse distance.", "vanilla_routing_white.py", inverse_first_matrix),
    entry!("tsp-black-vanilla", Tsp, BlackBox, Aco, Vanilla,
        "Inverse edge attribute.", "vanilla_tsp_black.py", inverse_flat),
    entry!("cvrp-white-vanilla", Cvrp, WhiteBox, Aco, Vanilla,
        "Inverse distance.", "vanilla_routing_white.py", inverse_first_matrix),
    entry!("cvrp-black-vanilla", Cvrp, BlackBox, Aco, Vanilla,
        "Inverse edge attribute.", "vanilla_cvrp_black.py", inverse_first_matrix),
    entry!("op-white-vanilla", Op, WhiteBox, Aco, Vanilla,
        "Inverse distance.", "vanilla_op_white.py", inverse_second_matrix),
    entry!("op-black-vanilla", Op, BlackBox, Aco, Vanilla,
        "Inverse edge attribute.", "vanilla_op_black.py", inverse_second_matrix),
    entry!("mkp-white-vanilla", Mkp, WhiteBox, Aco, Vanilla,
        "Value over total weight.", "vanilla_mkp_white.py", mkp_vanilla),
    entry!("mkp-black-vanilla", Mkp, BlackBox, Aco, Vanilla,
        "First attribute over summed second attributes.", "vanilla_mkp_black.py", mkp_vanilla),
    entry!("bpp-white-vanilla", Bpp, WhiteBox, Aco, Vanilla,
        "Relative fill of each fitting pair.", "vanilla_bpp_white.py", bpp_vanilla),
    entry!("bpp-black-vanilla", Bpp, BlackBox, Aco, Vanilla,
        "Relative fill of each fitting pair.", "vanilla_bpp_black.py", bpp_vanilla),
];

pub fn catalogue() -> &'static [CorpusEntry] {
    CATALOGUE
}

pub fn find(kind: ProblemKind, setting: Setting, framework: Framework, tier: Tier) -> Option<&'static CorpusEntry> {
    CATALOGUE
        .iter()
        .find(|e| e.kind == kind && e.setting == setting && e.framework == framework && e.tier == tier)
        .or_else(|| {
            // GLS shares the white-box vanilla baseline.
            (framework == Framework::Gls && tier == Tier::Vanilla)
                .then(|| find(kind, setting, Framework::Aco, tier))
                .flatten()
        })
}

pub fn by_name(name: &str) -> Option<&'static CorpusEntry> {
    CATALOGUE.iter().find(|e| e.name == name)
}

/// A parameterized heuristic template with exponent `{p}` and offset `{eps}`.
pub struct Family {
    pub kind: ProblemKind,
    pub setting: Setting,
    pub template: &'static str,
    native: FamilyFn,
}

static FAMILIES: &[Family] = &[
    Family {
        kind: ProblemKind::Tsp,
        setting: Setting::WhiteBox,
        template: "def heuristics(distance_matrix):\n    return 1.0 / (distance_matrix + {eps}) ** {p}\n",
        native: family_first_matrix,
    },
    Family {
        kind: ProblemKind::Tsp,
        setting: Setting::BlackBox,
        template: "def heuristics(edge_attr):\n    return (1.0 / (edge_attr + {eps}) ** {p}).flatten()\n",
        native: family_flat,
    },
    Family {
        kind: ProblemKind::Cvrp,
        setting: Setting::WhiteBox,
        template: "def heuristics(distance_matrix, coordinates, demands, capacity):\n    return 1.0 / (distance_matrix + {eps}) ** {p}\n",
        native: family_first_matrix,
    },
    Family {
        kind: ProblemKind::Cvrp,
        setting: Setting::BlackBox,
        template: "def heuristics(edge_attr, node_attr):\n    return 1.0 / (edge_attr + {eps}) ** {p}\n",
        native: family_first_matrix,
    },
    Family {
        kind: ProblemKind::Op,
        setting: Setting::WhiteBox,
        template: "def heuristics(prize, distance, maxlen):\n    return prize[np.newaxis, :] / (distance + {eps}) ** {p}\n",
        native: family_op,
    },
    Family {
        kind: ProblemKind::Op,
        setting: Setting::BlackBox,
        template: "def heuristics(node_attr, edge_attr, node_constraint):\n    return node_attr[np.newaxis, :] / (edge_attr + {eps}) ** {p}\n",
        native: family_op,
    },
    Family {
        kind: ProblemKind::Mkp,
        setting: Setting::WhiteBox,
        template: "def heuristics(prize, weight):\n    return (prize / (weight.sum(axis=1) + {eps})) ** {p}\n",
        native: family_mkp,
    },
    Family {
        kind: ProblemKind::Mkp,
        setting: Setting::BlackBox,
        template: "def heuristics(item_attr1, item_attr2):\n    return (item_attr1 / (item_attr2.sum(axis=1) + {eps})) ** {p}\n",
        native: family_mkp,
    },
    Family {
        kind: ProblemKind::Bpp,
        setting: Setting::WhiteBox,
        template: "def heuristics(demand, capacity):\n    fill = np.add.outer(demand, demand)\n    return np.where(fill <= capacity, (fill / capacity) ** {p} + {eps}, 0.0)\n",
        native: family_bpp,
    },
    Family {
        kind: ProblemKind::Bpp,
        setting: Setting::BlackBox,
        template: "def heuristics(node_attr, node_constraint):\n    fill = np.add.outer(node_attr, node_attr)\n    return np.where(fill <= node_constraint, (fill / node_constraint) ** {p} + {eps}, 0.0)\n",
        native: family_bpp,
    },
];

pub fn family(kind: ProblemKind, setting: Setting) -> Option<&'static Family> {
    FAMILIES.iter().find(|f| f.kind == kind && f.setting == setting)
}

impl Family {
    pub fn render(&self, p: f64, eps: f64) -> String {
        self.template
            .replace("{p}", &format!("{p}"))
            .replace("{eps}", &format!("{eps}"))
    }

    /// Recovers `(p, eps)` when `source` is an instance of this template.
    pub fn parse(&self, source: &str) -> Option<(f64, f64)> {
        let template = normalize_source(self.template);
        let source = normalize_source(source);
        let mut rest = source.as_str();
        let mut tpl = template.as_str();
        let (mut p, mut eps) = (None, None);
        loop {
            let next = [("{p}", 0), ("{eps}", 1)]
                .iter()
                .filter_map(|&(tok, which)| tpl.find(tok).map(|at| (at, tok, which)))
                .min_by_key(|&(at, _, _)| at);
            let Some((at, tok, which)) = next else {
                return (rest == tpl).then_some(()).and(p.zip(eps));
            };
            rest = rest.strip_prefix(&tpl[..at])?;
            let len = rest
                .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+')))
                .unwrap_or(rest.len());
            let value: f64 = rest[..len].parse().ok()?;
            if which == 0 {
                p = Some(value);
            } else {
                eps = Some(value);
            }
            rest = &rest[len..];
            tpl = &tpl[at + tok.len()..];
        }
    }

    pub fn evaluate(&self, args: &[ArgValue], p: f64, eps: f64) -> Result<ArgValue, Failure> {
        (self.native)(args, p, eps)
    }
}

/// Executes corpus entries and family instances in-process.
///
/// Sources outside the corpus fail with an exception naming the hash.
#[derive(Clone, Debug, Default)]
pub struct NativeRunner {
    entries: Vec<(String, &'static CorpusEntry)>,
}

impl NativeRunner {
    pub fn new() -> Self {
        Self {
            entries: CATALOGUE.iter().map(|e| (source_hash(e.source), e)).collect(),
        }
    }

    pub fn evaluate(&self, source: &str, args: &[ArgValue]) -> Result<ArgValue, Failure> {
        let hash = source_hash(source);
        if let Some((_, entry)) = self.entries.iter().find(|(h, _)| *h == hash) {
            return entry.evaluate(args);
        }
        for fam in FAMILIES {
            if let Some((p, eps)) = fam.parse(source) {
                return fam.evaluate(args, p, eps);
            }
        }
        Err(Failure::Exception(format!("no native implementation for source {}", &hash[..12])))
    }
}

impl HeuristicRunner for NativeRunner {
    fn run(&mut self, request: &ExecRequest) -> Result<ExecResponse, Failure> {
        self.evaluate(&request.source, &request.args).map(|value| ExecResponse {
            value,
            elapsed_s: 0.0,
        })
    }
}

fn arg_matrix(args: &[ArgValue], i: usize) -> Result<&Matrix, Failure> {
    args.get(i)
        .and_then(ArgValue::as_matrix)
        .ok_or_else(|| Failure::Exception(format!("argument {i} must be a matrix")))
}

fn arg_vector(args: &[ArgValue], i: usize) -> Result<&[f64], Failure> {
    args.get(i)
        .and_then(ArgValue::as_vector)
        .ok_or_else(|| Failure::Exception(format!("argument {i} must be a vector")))
}

fn arg_scalar(args: &[ArgValue], i: usize) -> Result<f64, Failure> {
    args.get(i)
        .and_then(ArgValue::as_scalar)
        .ok_or_else(|| Failure::Exception(format!("argument {i} must be a scalar")))
}

fn tsp_white(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    let d = arg_matrix(args, 0)?;
    let n = d.rows();
    let mut h = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let nearer = d.row(j).iter().zip(d.row(i)).filter(|(a, b)| a < b).count();
                let degree_penalty = nearer as f64 + 2.0;
                h[(i, j)] = 1.0 / math::pow(d[(i, j)], 3.0) / degree_penalty;
            }
        }
    }
    for i in 0..n {
        let sum: f64 = h.row(i).iter().sum();
        h.row_mut(i).iter_mut().for_each(|v| *v /= sum);
    }
    Ok(ArgValue::Matrix(h))
}

fn tsp_black(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    let e = arg_matrix(args, 0)?.as_slice();
    let min = e.iter().copied().fold(f64::INFINITY, f64::min);
    let max = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    let poly: Vec<f64> = e.iter().map(|v| (v - min) * (v - min)).collect();
    let pmin = poly.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = poly.iter().sum::<f64>() / poly.len() as f64;
    Ok(ArgValue::Vector(
        poly.iter()
            .map(|p| {
                let scaled = (p - pmin) / (range + 1e-10);
                let r = mean / (scaled + 1e-10);
                r * r
            })
            .collect(),
    ))
}

fn op_white(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    let prize = arg_vector(args, 0)?;
    let d = arg_matrix(args, 1)?;
    let maxlen = arg_scalar(args, 2)?;
    let n = prize.len();
    let mut h = Matrix::zeros(n, n);
    for i in 0..n {
        let mut scored: Vec<(usize, f64)> = (0..n)
            .filter(|&j| i != j && d[(i, j)] <= maxlen)
            .map(|j| {
                let ratio = prize[j] / d[(i, j)];
                (j, 0.5 * ratio + 0.5 * math::exp(ratio))
            })
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(core::cmp::Ordering::Equal));
        let mut acc = 0.0;
        for (j, score) in scored {
            if acc + d[(i, j)] <= maxlen {
                h[(i, j)] = score;
                acc += d[(i, j)];
            }
        }
    }
    Ok(ArgValue::Matrix(h))
}

fn op_black(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    let node = arg_vector(args, 0)?;
    let e = arg_matrix(args, 1)?;
    let c = arg_scalar(args, 2)?;
    let n = node.len();
    let special = node[0];
    let mut threshold: Vec<f64> = (0..n)
        .map(|j| {
            let col: f64 = (0..n).map(|i| e[(i, j)]).sum();
            f64::max(col * 0.7, c)
        })
        .collect();
    let mut history = vec![0.0; n];
    let mut h = Matrix::zeros(n, n);
    for i in 1..n {
        let diversity = e.row(i).iter().filter(|&&v| v > 0.0).count() as f64;
        for j in 0..n {
            if i == j {
                continue;
            }
            let w = e[(i, j)];
            if w > 0.0 && w <= threshold[j] {
                let contribution = special * node[j] * diversity / (w * w + 1e-10);
                let weighted = 0.25 * (node[j] * node[j]) / (w + 1e-10);
                let score = contribution * (weighted * (c / (w + 1e-10)));
                threshold[j] = f64::max(threshold[j], score / (1.0 + math::sqrt(history[j])));
                h[(i, j)] = f64::max(0.0, score);
                history[j] = score;
            }
        }
    }
    Ok(ArgValue::Matrix(h))
}

fn cvrp_white(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    let d = arg_matrix(args, 0)?;
    let coords = arg_matrix(args, 1)?;
    let demands = arg_vector(args, 2)?;
    let capacity = arg_scalar(args, 3)?;
    let n = d.rows();
    let dist = |a: usize, b: usize| {
        math::hypot(coords[(a, 0)] - coords[(b, 0)], coords[(a, 1)] - coords[(b, 1)])
    };
    let avg = demands[1..].iter().sum::<f64>() / (n - 1) as f64;
    let mut h = Matrix::zeros(n, n);
    for i in 1..n {
        for j in 1..n {
            if i == j {
                continue;
            }
            let total = demands[i] + demands[j];
            let distance_score = 1.0 / (d[(i, j)] * d[(i, j)] + 1e-5);
            let p = dist(i, j);
            let proximity_score = 1.0 / (p * p + 1e-5);
            let mut score = distance_score * proximity_score;
            if total > capacity {
                score /= (total * total) / (capacity + 1e-5);
            }
            let cluster: f64 = (1..n)
                .filter(|&k| demands[k] > avg && dist(k, i) < dist(k, j))
                .map(|k| demands[k])
                .sum::<f64>()
                / f64::max(avg, 1e-5);
            h[(i, j)] = score * (1.0 + cluster);
        }
    }
    Ok(ArgValue::Matrix(h))
}

fn cvrp_black(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    let e = arg_matrix(args, 0)?;
    let node = arg_vector(args, 1)?;
    let n = e.rows();
    let norm: Vec<f64> = node.iter().map(|v| math::pow(*v, 1.0 / 3.0)).collect();
    let mut h = Matrix::zeros(n, n);
    let mut w = Matrix::filled(n, n, 1.0);
    let mut prev = h.clone();
    for _ in 0..100 {
        for i in 0..n {
            for j in 0..n {
                if e[(i, j)] != 0.0 {
                    h[(i, j)] = norm[i] * norm[j] / (e[(i, j)] * e[(i, j)]);
                    w[(i, j)] = 0.8 * w[(i, j)] + 0.2 * h[(i, j)];
                }
            }
        }
        for (hv, wv) in h.as_mut_slice().iter_mut().zip(w.as_slice()) {
            *hv *= wv;
        }
        let positive: Vec<f64> = h.as_slice().iter().copied().filter(|&v| v > 0.0).collect();
        if !positive.is_empty() {
            let mean = positive.iter().sum::<f64>() / positive.len() as f64;
            let var = positive.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / positive.len() as f64;
            let shift = 0.01 * (mean - math::sqrt(var));
            for i in 0..n {
                for j in 0..n {
                    if e[(i, j)] != 0.0 {
                        w[(i, j)] = f64::max(w[(i, j)] + shift, 0.0);
                    }
                }
            }
        }
        let delta = h
            .as_slice()
            .iter()
            .zip(prev.as_slice())
            .map(|(a, b)| math::abs(a - b))
            .fold(0.0, f64::max);
        if delta < 1e-5 {
            break;
        }
        prev = h.clone();
    }
    Ok(ArgValue::Matrix(h))
}

fn mkp_white(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    let prize = arg_vector(args, 0)?;
    let weight = arg_matrix(args, 1)?;
    let n = prize.len();
    let mean = prize.iter().sum::<f64>() / n as f64;
    let pmax = prize.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pmin = prize.iter().copied().fold(f64::INFINITY, f64::min);
    // After the last periodic reset, nineteen half-steps pull the tracked
    // performance toward the efficiency score.
    let settle = 1.0 - math::pow(2.0, -19.0);
    let mut h = vec![0.0; n];
    for i in 0..n {
        let max_weight = weight.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max_weight <= 0.0 {
            continue;
        }
        let efficiency = prize[i] / max_weight;
        let diversity = 1.0 / (1.0 + math::abs(prize[i] - mean));
        let performance = efficiency * settle;
        let synergy: f64 = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let gap: f64 = weight.row(i).iter().zip(weight.row(j)).map(|(a, b)| math::abs(a - b)).sum();
                math::exp(-gap) * (1.0 + 0.5 * math::abs(prize[i] - prize[j]) / (pmax - pmin))
            })
            .sum::<f64>()
            / (n - 1) as f64;
        h[i] = efficiency * diversity * performance * synergy;
    }
    Ok(ArgValue::Vector(h))
}

fn mkp_black(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    let a1 = arg_vector(args, 0)?;
    let a2 = arg_matrix(args, 1)?;
    Ok(ArgValue::Vector(
        (0..a1.len())
            .map(|i| {
                let row = a2.row(i);
                let total: f64 = row.iter().sum();
                let max_weight = row.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1e-6;
                let ratio = (a1[i] / max_weight) / (total + 1e-6);
                if total > 0.0 {
                    f64::max(ratio * ratio * total, 0.0)
                } else {
                    0.0
                }
            })
            .collect(),
    ))
}

/// Item indices by descending size; equal sizes in descending index order.
fn descending_order(sizes: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..sizes.len()).collect();
    idx.sort_by(|&a, &b| sizes[a].partial_cmp(&sizes[b]).unwrap_or(core::cmp::Ordering::Equal));
    idx.reverse();
    idx
}

fn bpp_white(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    let demand = arg_vector(args, 0)?;
    let capacity = arg_scalar(args, 1)?;
    let n = demand.len();
    let mut bins: Vec<(f64, Vec<usize>)> = Vec::new();
    for idx in descending_order(demand) {
        match bins.iter_mut().find(|(load, _)| load + demand[idx] <= capacity) {
            Some((load, items)) => {
                *load += demand[idx];
                items.push(idx);
            }
            None => bins.push((demand[idx], vec![idx])),
        }
    }
    let mut h = Matrix::zeros(n, n);
    for (_, items) in &bins {
        for (a, &i) in items.iter().enumerate() {
            for &j in &items[a + 1..] {
                let used = demand[i] + demand[j];
                if used <= capacity {
                    let average = used / 2.0;
                    let score = 1.0 / (1.0 + (capacity - used) + average / capacity);
                    h[(i, j)] = score;
                    h[(j, i)] = score;
                }
            }
        }
    }
    Ok(ArgValue::Matrix(h))
}

/// Lloyd's algorithm in one dimension from quantile seeds.
pub fn kmeans_1d(values: &[f64], k: usize) -> Vec<usize> {
    let n = values.len();
    if n == 0 || k == 0 {
        return vec![0; n];
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let mut centers: Vec<f64> = (0..k).map(|c| sorted[((2 * c + 1) * n / (2 * k)).min(n - 1)]).collect();
    let mut labels = vec![usize::MAX; n];
    for _ in 0..100 {
        let mut changed = false;
        for (i, &v) in values.iter().enumerate() {
            let mut best = 0;
            for c in 1..k {
                if math::abs(v - centers[c]) < math::abs(v - centers[best]) {
                    best = c;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (c, center) in centers.iter_mut().enumerate() {
            let (sum, count) = values
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == c)
                .fold((0.0, 0usize), |(s, m), (v, _)| (s + v, m + 1));
            if count > 0 {
                *center = sum / count as f64;
            }
        }
    }
    labels
}

fn bpp_black(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    let node = arg_vector(args, 0)?;
    let c = arg_scalar(args, 1)?;
    let n = node.len();
    let clusters = kmeans_1d(node, core::cmp::min(n / 2, 5));
    Ok(ArgValue::Matrix(Matrix::from_fn(n, n, |i, j| {
        let combined = node[i] + node[j];
        if i == j || combined > c {
            return 0.0;
        }
        let cluster_score = if clusters[i] == clusters[j] { 1.0 } else { 0.5 };
        math::exp(-math::abs(c - combined)) * cluster_score
    })))
}

fn tsp_gls(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    let d = arg_matrix(args, 0)?;
    let n = d.rows();
    let sums: Vec<f64> = (0..n).map(|i| d.row(i).iter().sum()).collect();
    Ok(ArgValue::Matrix(Matrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            d[(i, j)] / (sums[i] + sums[j])
        }
    })))
}

fn inverse_matrix(d: &Matrix) -> Matrix {
    Matrix::from_fn(d.rows(), d.cols(), |i, j| if i == j { 0.0 } else { 1.0 / d[(i, j)] })
}

fn inverse_first_matrix(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    Ok(ArgValue::Matrix(inverse_matrix(arg_matrix(args, 0)?)))
}

fn inverse_second_matrix(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    Ok(ArgValue::Matrix(inverse_matrix(arg_matrix(args, 1)?)))
}

fn inverse_flat(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    Ok(ArgValue::Vector(arg_matrix(args, 0)?.as_slice().iter().map(|v| 1.0 / v).collect()))
}

fn mkp_vanilla(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    let v = arg_vector(args, 0)?;
    let w = arg_matrix(args, 1)?;
    Ok(ArgValue::Vector(
        (0..v.len())
            .map(|i| {
                let total: f64 = w.row(i).iter().sum();
                if total > 0.0 {
                    v[i] / total
                } else {
                    0.0
                }
            })
            .collect(),
    ))
}

fn bpp_vanilla(args: &[ArgValue]) -> Result<ArgValue, Failure> {
    let s = arg_vector(args, 0)?;
    let c = arg_scalar(args, 1)?;
    let n = s.len();
    Ok(ArgValue::Matrix(Matrix::from_fn(n, n, |i, j| {
        let fill = s[i] + s[j];
        if i != j && fill <= c {
            fill / c
        } else {
            0.0
        }
    })))
}

fn family_first_matrix(args: &[ArgValue], p: f64, eps: f64) -> Result<ArgValue, Failure> {
    let d = arg_matrix(args, 0)?;
    Ok(ArgValue::Matrix(Matrix::from_fn(d.rows(), d.cols(), |i, j| {
        1.0 / math::pow(d[(i, j)] + eps, p)
    })))
}

fn family_flat(args: &[ArgValue], p: f64, eps: f64) -> Result<ArgValue, Failure> {
    let d = arg_matrix(args, 0)?;
    Ok(ArgValue::Vector(d.as_slice().iter().map(|v| 1.0 / math::pow(v + eps, p)).collect()))
}

fn family_op(args: &[ArgValue], p: f64, eps: f64) -> Result<ArgValue, Failure> {
    let prize = arg_vector(args, 0)?;
    let d = arg_matrix(args, 1)?;
    Ok(ArgValue::Matrix(Matrix::from_fn(d.rows(), d.cols(), |i, j| {
        prize[j] / math::pow(d[(i, j)] + eps, p)
    })))
}

fn family_mkp(args: &[ArgValue], p: f64, eps: f64) -> Result<ArgValue, Failure> {
    let v = arg_vector(args, 0)?;
    let w = arg_matrix(args, 1)?;
    Ok(ArgValue::Vector(
        (0..v.len())
            .map(|i| math::pow(v[i] / (w.row(i).iter().sum::<f64>() + eps), p))
            .collect(),
    ))
}

fn family_bpp(args: &[ArgValue], p: f64, eps: f64) -> Result<ArgValue, Failure> {
    let s = arg_vector(args, 0)?;
    let c = arg_scalar(args, 1)?;
    let n = s.len();
    Ok(ArgValue::Matrix(Matrix::from_fn(n, n, |i, j| {
        let fill = s[i] + s[j];
        if fill <= c {
            math::pow(fill / c, p) + eps
        } else {
            0.0
        }
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::distance_matrix;

    fn square3() -> Matrix {
        distance_matrix(&[[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]])
    }

    #[test]
    fn tsp_white_rows_sum_to_one_and_match_hand_values() {
        let out = tsp_white(&[ArgValue::Matrix(square3())]).unwrap();
        let h = out.as_matrix().unwrap();
        for i in 0..3 {
            assert!((h.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // Row 0: d01 = 3, d02 = 4. Row 1 is never below row 0 except at
        // column 1 (0 < 3), row 2 only at column 2 (0 < 4), so both
        // penalties are 1 + 2 = 3.
        let a = 1.0 / 27.0 / 3.0;
        let b = 1.0 / 64.0 / 3.0;
        assert!((h[(0, 1)] - a / (a + b)).abs() < 1e-12);
        assert!((h[(0, 2)] - b / (a + b)).abs() < 1e-12);
    }

    #[test]
    fn tsp_black_hand_evaluation() {
        let edges = Matrix::from_vec(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        let out = tsp_black(&[ArgValue::Matrix(edges)]).unwrap();
        let v = out.as_vector().unwrap();
        // poly = [0, 1, 4], mean 5/3, range 2.
        let mean = 5.0 / 3.0;
        let expect = |poly: f64| {
            let r: f64 = mean / (poly / (2.0 + 1e-10) + 1e-10);
            r * r
        };
        for (got, poly) in v.iter().zip([0.0, 1.0, 4.0]) {
            assert!((got - expect(poly)).abs() <= 1e-9 * expect(poly), "{got}");
        }
    }

    #[test]
    fn family_round_trip() {
        for fam in FAMILIES {
            let src = fam.render(2.5, 1e-6);
            assert_eq!(fam.parse(&src), Some((2.5, 1e-6)));
            assert_eq!(fam.parse(&src.replace("**", "*")), None);
        }
        let fam = family(ProblemKind::Tsp, Setting::WhiteBox).unwrap();
        assert_eq!(fam.parse("def heuristics(distance_matrix):\n  return 1.0 / (distance_matrix + 0.5) ** 3"), Some((3.0, 0.5)));
    }

    #[test]
    fn native_runner_dispatch() {
        let runner = NativeRunner::new();
        let args = [ArgValue::Matrix(square3())];
        let best = find(ProblemKind::Tsp, Setting::WhiteBox, Framework::Aco, Tier::Best).unwrap();
        assert_eq!(runner.evaluate(best.source, &args), tsp_white(&args));
        let reformatted = best.source.replace("    ", "\t");
        assert!(runner.evaluate(&reformatted, &args).is_ok());
        assert!(matches!(runner.evaluate("return 1/0", &args), Err(Failure::Exception(_))));
    }

    #[test]
    fn every_kind_and_setting_has_entries() {
        for kind in ProblemKind::ALL {
            for setting in [Setting::WhiteBox, Setting::BlackBox] {
                assert!(find(kind, setting, Framework::Aco, Tier::Best).is_some());
                assert!(find(kind, setting, Framework::Aco, Tier::Vanilla).is_some());
                assert!(family(kind, setting).is_some());
            }
        }
        assert!(find(ProblemKind::Tsp, Setting::WhiteBox, Framework::Gls, Tier::Best).is_some());
        assert!(find(ProblemKind::Tsp, Setting::WhiteBox, Framework::Gls, Tier::Vanilla).is_some());
    }

    #[test]
    fn kmeans_separates_clear_groups() {
        let labels = kmeans_1d(&[1.0, 1.1, 50.0, 50.2, 99.0, 98.5], 3);
        assert_eq!(labels[0], labels[1]);
        assert_eq!(labels[2], labels[3]);
        assert_eq!(labels[4], labels[5]);
        assert_ne!(labels[0], labels[2]);
        assert_ne!(labels[2], labels[4]);
    }

    #[test]
    fn mkp_white_settles_to_efficiency_product() {
        let prize = vec![1.0, 2.0, 4.0];
        let weight = Matrix::from_rows(&[vec![1.0, 0.5], vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let out = mkp_white(&[ArgValue::Vector(prize), ArgValue::Matrix(weight)]).unwrap();
        let h = out.as_vector().unwrap();
        // Item 2: efficiency 4, mean prize 7/3, diversity 1/(1 + 5/3).
        let syn = ((-0.5f64).exp() * (1.0 + 0.5 * 3.0 / 3.0) + (-1.0f64).exp() * (1.0 + 0.5 * 2.0 / 3.0)) / 2.0;
        let expect = 4.0 * (1.0 / (1.0 + 5.0 / 3.0)) * 4.0 * (1.0 - 2f64.powi(-19)) * syn;
        assert!((h[2] - expect).abs() < 1e-12);
    }
}
