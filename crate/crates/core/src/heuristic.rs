//! Heuristic candidates, their calling conventions and output validation.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::matrix::Matrix;
use crate::problem::{CopInstance, Payload, ProblemKind};

/// How much problem structure the prompts and arguments reveal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Setting {
    #[serde(rename = "white")]
    WhiteBox,
    #[serde(rename = "black")]
    BlackBox,
}

impl Setting {
    pub fn name(self) -> &'static str {
        match self {
            Setting::WhiteBox => "white",
            Setting::BlackBox => "black",
        }
    }
}

impl FromStr for Setting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "white" | "white_box" | "white-box" => Ok(Setting::WhiteBox),
            "black" | "black_box" | "black-box" => Ok(Setting::BlackBox),
            _ => Err(format!("unknown setting `{s}` (expected white or black)")),
        }
    }
}

/// Metaheuristic that consumes the heuristic's output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Framework {
    Aco,
    Gls,
}

/// Guidance produced by a heuristic, in solver component layout.
#[derive(Clone, Debug, PartialEq)]
pub enum Guidance {
    Matrix(Matrix),
    Vector(Vec<f64>),
}

impl Guidance {
    pub fn values(&self) -> &[f64] {
        match self {
            Guidance::Matrix(m) => m.as_slice(),
            Guidance::Vector(v) => v,
        }
    }

    pub fn as_matrix(&self) -> Option<&Matrix> {
        match self {
            Guidance::Matrix(m) => Some(m),
            Guidance::Vector(_) => None,
        }
    }
}

/// A numeric argument or result crossing the execution boundary.
#[derive(Clone, Debug, PartialEq)]
pub enum ArgValue {
    Matrix(Matrix),
    Vector(Vec<f64>),
    Scalar(f64),
}

impl ArgValue {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ArgValue::Matrix(_) => "matrix",
            ArgValue::Vector(_) => "vector",
            ArgValue::Scalar(_) => "scalar",
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            ArgValue::Matrix(m) => m.as_slice(),
            ArgValue::Vector(v) => v,
            ArgValue::Scalar(s) => core::slice::from_ref(s),
        }
    }

    pub fn as_matrix(&self) -> Option<&Matrix> {
        match self {
            ArgValue::Matrix(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            ArgValue::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            ArgValue::Scalar(s) => Some(*s),
            _ => None,
        }
    }
}

/// Shape a heuristic must return.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputShape {
    Matrix(usize, usize),
    Vector(usize),
}

impl fmt::Display for OutputShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputShape::Matrix(r, c) => write!(f, "{r}x{c} matrix"),
            OutputShape::Vector(n) => write!(f, "length-{n} vector"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum OutputLayout {
    /// `n x n` matrix.
    Square,
    /// Length-`n` vector.
    PerItem,
    /// Flat vector over the `n (n - 1)` off-diagonal edges, row-major.
    FlatEdges,
}

/// Calling convention of the heuristic function for one problem setting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeuristicSignature {
    pub kind: ProblemKind,
    pub setting: Setting,
    pub framework: Framework,
    /// Parameter names, in call order.
    pub params: &'static [&'static str],
    layout: OutputLayout,
}

impl HeuristicSignature {
    pub fn new(kind: ProblemKind, setting: Setting, framework: Framework) -> Result<Self, String> {
        use OutputLayout::*;
        use ProblemKind::*;
        use Setting::*;
        let (params, layout): (&'static [&'static str], OutputLayout) = match (framework, kind, setting) {
            (Framework::Gls, Tsp, WhiteBox) => (&["distance_matrix"], Square),
            (Framework::Gls, Tsp, BlackBox) => (&["edge_attr"], FlatEdges),
            (Framework::Gls, _, _) => return Err(format!("guided local search supports TSP only, not {kind}")),
            (Framework::Aco, Tsp, WhiteBox) => (&["distance_matrix"], Square),
            (Framework::Aco, Tsp, BlackBox) => (&["edge_attr"], FlatEdges),
            (Framework::Aco, Op, WhiteBox) => (&["prize", "distance", "maxlen"], Square),
            (Framework::Aco, Op, BlackBox) => (&["node_attr", "edge_attr", "node_constraint"], Square),
            (Framework::Aco, Cvrp, WhiteBox) => {
                (&["distance_matrix", "coordinates", "demands", "capacity"], Square)
            }
            (Framework::Aco, Cvrp, BlackBox) => (&["edge_attr", "node_attr"], Square),
            (Framework::Aco, Mkp, WhiteBox) => (&["prize", "weight"], PerItem),
            (Framework::Aco, Mkp, BlackBox) => (&["item_attr1", "item_attr2"], PerItem),
            (Framework::Aco, Bpp, WhiteBox) => (&["demand", "capacity"], Square),
            (Framework::Aco, Bpp, BlackBox) => (&["node_attr", "node_constraint"], Square),
        };
        Ok(Self {
            kind,
            setting,
            framework,
            params,
            layout,
        })
    }

    /// Arguments for `instance`, matching [`Self::params`].
    ///
    /// Black-box arguments carry the same numbers as white-box ones under
    /// anonymous names; TSP distances become an `(n_edges, 1)` edge
    /// attribute column.
    pub fn arguments(&self, instance: &CopInstance) -> Vec<ArgValue> {
        let n = instance.size();
        match instance.payload() {
            Payload::Tsp { .. } => {
                let d = instance.distances().expect("routing instance");
                match self.layout {
                    OutputLayout::FlatEdges => {
                        let edges: Vec<f64> = (0..n)
                            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                            .map(|e| d[e])
                            .collect();
                        let rows = edges.len();
                        vec![ArgValue::Matrix(Matrix::from_vec(rows, 1, edges).expect("column"))]
                    }
                    _ => vec![ArgValue::Matrix(d.clone())],
                }
            }
            Payload::Cvrp {
                coordinates,
                demands,
                capacity,
            } => {
                let d = instance.distances().expect("routing instance").clone();
                match self.setting {
                    Setting::WhiteBox => vec![
                        ArgValue::Matrix(d),
                        ArgValue::Matrix(coords_matrix(coordinates)),
                        ArgValue::Vector(demands.clone()),
                        ArgValue::Scalar(*capacity),
                    ],
                    // Demands are passed relative to capacity so the vehicle
                    // limit stays implicit.
                    Setting::BlackBox => vec![
                        ArgValue::Matrix(d),
                        ArgValue::Vector(demands.iter().map(|q| q / capacity).collect()),
                    ],
                }
            }
            Payload::Op {
                prizes, max_length, ..
            } => {
                let d = instance.distances().expect("routing instance").clone();
                vec![
                    ArgValue::Vector(prizes.clone()),
                    ArgValue::Matrix(d),
                    ArgValue::Scalar(*max_length),
                ]
            }
            Payload::Mkp {
                values, weights, ..
            } => {
                // Item-major `n x m`, so row `i` holds item i's weights.
                vec![ArgValue::Vector(values.clone()), ArgValue::Matrix(weights.transpose())]
            }
            Payload::Bpp { sizes, capacity } => {
                vec![ArgValue::Vector(sizes.clone()), ArgValue::Scalar(*capacity)]
            }
        }
        .into_iter()
        .inspect(|_| debug_assert!(n > 0))
        .collect()
    }

    pub fn expected_output(&self, instance: &CopInstance) -> OutputShape {
        let n = instance.size();
        match self.layout {
            OutputLayout::Square => OutputShape::Matrix(n, n),
            OutputLayout::PerItem => OutputShape::Vector(n),
            OutputLayout::FlatEdges => OutputShape::Vector(n * (n - 1)),
        }
    }

    /// Validates a raw result and converts it to solver guidance.
    ///
    /// Non-finite entries are a failure; negative entries are clamped to 0
    /// and counted in the returned report.
    pub fn to_guidance(&self, instance: &CopInstance, output: ArgValue) -> Result<(Guidance, usize), Failure> {
        let expected = self.expected_output(instance);
        let n = instance.size();
        let values: Vec<f64> = match (expected, output) {
            (OutputShape::Matrix(r, c), ArgValue::Matrix(m)) if m.shape() == (r, c) => m.into_vec(),
            (OutputShape::Vector(len), ArgValue::Vector(v)) if v.len() == len => v,
            (OutputShape::Vector(len), ArgValue::Matrix(m))
                if (m.cols() == 1 || m.rows() == 1) && m.rows() * m.cols() == len =>
            {
                m.into_vec()
            }
            (_, other) => {
                let got = match &other {
                    ArgValue::Matrix(m) => format!("{}x{} matrix", m.rows(), m.cols()),
                    ArgValue::Vector(v) => format!("length-{} vector", v.len()),
                    ArgValue::Scalar(_) => "scalar".to_string(),
                };
                return Err(Failure::Shape(format!("expected {expected}, got {got}")));
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Failure::NonFinite);
        }
        let mut clamped = 0;
        let values: Vec<f64> = values
            .into_iter()
            .map(|v| {
                if v < 0.0 {
                    clamped += 1;
                    0.0
                } else {
                    v
                }
            })
            .collect();
        let guidance = match self.layout {
            OutputLayout::Square => Guidance::Matrix(Matrix::from_vec(n, n, values).expect("checked shape")),
            OutputLayout::PerItem => Guidance::Vector(values),
            OutputLayout::FlatEdges => {
                let mut m = Matrix::zeros(n, n);
                let mut it = values.into_iter();
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            m[(i, j)] = it.next().expect("checked length");
                        }
                    }
                }
                Guidance::Matrix(m)
            }
        };
        Ok((guidance, clamped))
    }
}

fn coords_matrix(coords: &[[f64; 2]]) -> Matrix {
    Matrix::from_fn(coords.len(), 2, |i, j| coords[i][j])
}

/// Typed reason a heuristic produced no usable guidance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "message", rename_all = "snake_case")]
pub enum Failure {
    Timeout,
    Exception(String),
    #[serde(rename = "shape_mismatch")]
    Shape(String),
    NonFinite,
    /// The solver rejected the guidance.
    Solver(String),
}

impl Failure {
    pub fn label(&self) -> &'static str {
        match self {
            Failure::Timeout => "timeout",
            Failure::Exception(_) => "exception",
            Failure::Shape(_) => "shape_mismatch",
            Failure::NonFinite => "non_finite",
            Failure::Solver(_) => "solver",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Timeout => f.write_str("timeout"),
            Failure::Exception(m) => write!(f, "exception: {m}"),
            Failure::Shape(m) => write!(f, "shape mismatch: {m}"),
            Failure::NonFinite => f.write_str("non-finite output"),
            Failure::Solver(m) => write!(f, "solver error: {m}"),
        }
    }
}

/// Whether a candidate has been scored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Validity {
    Pending,
    Valid,
    Invalid(Failure),
}

/// The prompt strategy or collaboration step that produced a candidate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Init,
    E1,
    E2,
    M1,
    M2,
    Explorer { round: usize },
    Exploiter { round: usize },
    Integrator { round: usize },
    EliteFusion,
    Mutation { memory: String, base: usize },
    /// Supplied directly (corpus entries, tests).
    Seeded,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Init => f.write_str("init"),
            Origin::E1 => f.write_str("e1"),
            Origin::E2 => f.write_str("e2"),
            Origin::M1 => f.write_str("m1"),
            Origin::M2 => f.write_str("m2"),
            Origin::Explorer { round } => write!(f, "explorer/r{round}"),
            Origin::Exploiter { round } => write!(f, "exploiter/r{round}"),
            Origin::Integrator { round } => write!(f, "integrator/r{round}"),
            Origin::EliteFusion => f.write_str("elite_fusion"),
            Origin::Mutation { memory, base } => write!(f, "mutation/{memory}/h{base}"),
            Origin::Seeded => f.write_str("seeded"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    pub origin: Origin,
    pub generation: usize,
}

/// A heuristic program under evolution. Higher fitness is better.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicCandidate {
    /// Creation order; earlier candidates win fitness ties.
    pub id: u64,
    pub description: String,
    pub source: String,
    fitness: Option<f64>,
    validity: Validity,
    pub lineage: Lineage,
}

impl HeuristicCandidate {
    pub fn new(id: u64, description: impl Into<String>, source: impl Into<String>, lineage: Lineage) -> Self {
        Self {
            id,
            description: description.into(),
            source: source.into(),
            fitness: None,
            validity: Validity::Pending,
            lineage,
        }
    }

    pub fn fitness(&self) -> Option<f64> {
        self.fitness
    }

    pub fn validity(&self) -> &Validity {
        &self.validity
    }

    pub fn is_valid(&self) -> bool {
        self.validity == Validity::Valid
    }

    /// Raw objective (lower is better for every kind once oriented), as
    /// shown to the language model.
    pub fn prompt_objective(&self) -> Option<f64> {
        self.fitness.map(|f| -f)
    }

    pub fn mark_valid(&mut self, fitness: f64) {
        self.fitness = Some(fitness);
        self.validity = Validity::Valid;
    }

    pub fn mark_invalid(&mut self, failure: Failure) {
        self.fitness = None;
        self.validity = Validity::Invalid(failure);
    }

    pub fn source_hash(&self) -> String {
        source_hash(&self.source)
    }

    pub fn entry_name(&self) -> String {
        entry_name(&self.source)
    }
}

/// Source with runs of whitespace collapsed to single spaces.
pub fn normalize_source(source: &str) -> String {
    let mut out = String::with_capacity(source.len());
    for tok in source.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(tok);
    }
    out
}

/// Hex SHA-256 of the whitespace-normalized source.
pub fn source_hash(source: &str) -> String {
    hex::encode(Sha256::digest(normalize_source(source).as_bytes()))
}

/// Name of the entry function: the first top-level `def`, else the first
/// `def` anywhere, else `heuristics`.
pub fn entry_name(source: &str) -> String {
    let find = |top_level: bool| {
        source.lines().find_map(|line| {
            let trimmed = line.trim_start();
            if top_level && trimmed.len() != line.len() {
                return None;
            }
            let rest = trimmed.strip_prefix("def ")?;
            let name: String = rest
                .trim_start()
                .chars()
                .take_while(|c| c.is_alphanumeric() || *c == '_')
                .collect();
            (!name.is_empty()).then_some(name)
        })
    };
    find(true).or_else(|| find(false)).unwrap_or_else(|| "heuristics".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{generate_instance, GeneratorConfig};

    #[test]
    fn entry_names() {
        assert_eq!(entry_name("import numpy as np\ndef heuristics_v2(d):\n    return d"), "heuristics_v2");
        assert_eq!(entry_name("    def inner(x): pass"), "inner");
        assert_eq!(entry_name("return 1/0"), "heuristics");
    }

    #[test]
    fn hash_ignores_whitespace_layout() {
        assert_eq!(source_hash("def f(x):\n    return x\n"), source_hash("def  f(x):\n\treturn   x"));
        assert_ne!(source_hash("def f(x): return x"), source_hash("def f(x): return -x"));
    }

    #[test]
    fn black_box_tsp_edges_round_trip() {
        let inst = generate_instance(ProblemKind::Tsp, 4, 1, 0, &GeneratorConfig::default()).unwrap();
        let sig = HeuristicSignature::new(ProblemKind::Tsp, Setting::BlackBox, Framework::Aco).unwrap();
        let args = sig.arguments(&inst);
        let col = args[0].as_matrix().unwrap();
        assert_eq!(col.shape(), (12, 1));
        let (g, clamped) = sig.to_guidance(&inst, ArgValue::Vector(col.as_slice().to_vec())).unwrap();
        assert_eq!(clamped, 0);
        let m = g.as_matrix().unwrap();
        assert_eq!(m, inst.distances().unwrap());
    }

    #[test]
    fn output_validation() {
        let inst = generate_instance(ProblemKind::Tsp, 3, 1, 0, &GeneratorConfig::default()).unwrap();
        let sig = HeuristicSignature::new(ProblemKind::Tsp, Setting::WhiteBox, Framework::Aco).unwrap();
        assert!(matches!(
            sig.to_guidance(&inst, ArgValue::Vector(vec![1.0; 3])),
            Err(Failure::Shape(_))
        ));
        let mut m = Matrix::filled(3, 3, 1.0);
        m[(0, 1)] = f64::NAN;
        assert_eq!(sig.to_guidance(&inst, ArgValue::Matrix(m)), Err(Failure::NonFinite));
        let mut m = Matrix::filled(3, 3, 1.0);
        m[(0, 1)] = -2.0;
        let (g, clamped) = sig.to_guidance(&inst, ArgValue::Matrix(m)).unwrap();
        assert_eq!(clamped, 1);
        assert_eq!(g.as_matrix().unwrap()[(0, 1)], 0.0);
    }

    #[test]
    fn mkp_weights_are_item_major() {
        let inst = generate_instance(ProblemKind::Mkp, 7, 1, 0, &GeneratorConfig::default()).unwrap();
        let sig = HeuristicSignature::new(ProblemKind::Mkp, Setting::WhiteBox, Framework::Aco).unwrap();
        let args = sig.arguments(&inst);
        assert_eq!(args[1].as_matrix().unwrap().shape(), (7, 5));
        assert_eq!(sig.expected_output(&inst), OutputShape::Vector(7));
    }

    #[test]
    fn fitness_present_iff_valid() {
        let lineage = Lineage {
            origin: Origin::Seeded,
            generation: 0,
        };
        let mut c = HeuristicCandidate::new(0, "d", "s", lineage);
        assert_eq!(c.fitness(), None);
        c.mark_valid(-5.0);
        assert_eq!((c.fitness(), c.is_valid()), (Some(-5.0), true));
        assert_eq!(c.prompt_objective(), Some(5.0));
        c.mark_invalid(Failure::Timeout);
        assert_eq!((c.fitness(), c.is_valid()), (None, false));
    }

    #[test]
    fn gls_only_for_tsp() {
        assert!(HeuristicSignature::new(ProblemKind::Cvrp, Setting::WhiteBox, Framework::Gls).is_err());
    }
}
