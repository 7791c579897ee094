//! Prompt templates and placeholder rendering.
//!
//! Placeholders are `{name}` with `name` matching `[a-z_][a-z0-9_]*`; any
//! other brace is literal text. Substituted values are never rescanned.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::heuristic::{Framework, HeuristicSignature, Setting};
use crate::problem::ProblemKind;

/// Every template the pipeline renders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    EohInit,
    EohE1,
    EohE2,
    EohM1,
    EohM2,
    Explorer,
    Exploiter,
    Integrator,
    EliteIntegrator,
    CriticInitial,
    CriticBetter,
    CriticWorse,
    LtReflect,
    EliteMutation,
    OutputRequest,
}

impl TemplateId {
    pub const ALL: [TemplateId; 15] = [
        TemplateId::EohInit,
        TemplateId::EohE1,
        TemplateId::EohE2,
        TemplateId::EohM1,
        TemplateId::EohM2,
        TemplateId::Explorer,
        TemplateId::Exploiter,
        TemplateId::Integrator,
        TemplateId::EliteIntegrator,
        TemplateId::CriticInitial,
        TemplateId::CriticBetter,
        TemplateId::CriticWorse,
        TemplateId::LtReflect,
        TemplateId::EliteMutation,
        TemplateId::OutputRequest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::EohInit => "eoh_init",
            TemplateId::EohE1 => "eoh_e1",
            TemplateId::EohE2 => "eoh_e2",
            TemplateId::EohM1 => "eoh_m1",
            TemplateId::EohM2 => "eoh_m2",
            TemplateId::Explorer => "explorer",
            TemplateId::Exploiter => "exploiter",
            TemplateId::Integrator => "integrator",
            TemplateId::EliteIntegrator => "elite_integrator",
            TemplateId::CriticInitial => "critic_initial",
            TemplateId::CriticBetter => "critic_better",
            TemplateId::CriticWorse => "critic_worse",
            TemplateId::LtReflect => "lt_reflect",
            TemplateId::EliteMutation => "elite_mutation",
            TemplateId::OutputRequest => "output_request",
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            TemplateId::EohInit => include_str!("../templates/eoh_init.txt"),
            TemplateId::EohE1 => include_str!("../templates/eoh_e1.txt"),
            TemplateId::EohE2 => include_str!("../templates/eoh_e2.txt"),
            TemplateId::EohM1 => include_str!("../templates/eoh_m1.txt"),
            TemplateId::EohM2 => include_str!("../templates/eoh_m2.txt"),
            TemplateId::Explorer => include_str!("../templates/explorer.txt"),
            TemplateId::Exploiter => include_str!("../templates/exploiter.txt"),
            TemplateId::Integrator => include_str!("../templates/integrator.txt"),
            TemplateId::EliteIntegrator => include_str!("../templates/elite_integrator.txt"),
            TemplateId::CriticInitial => include_str!("../templates/critic_initial.txt"),
            TemplateId::CriticBetter => include_str!("../templates/critic_better.txt"),
            TemplateId::CriticWorse => include_str!("../templates/critic_worse.txt"),
            TemplateId::LtReflect => include_str!("../templates/lt_reflect.txt"),
            TemplateId::EliteMutation => include_str!("../templates/elite_mutation.txt"),
            TemplateId::OutputRequest => include_str!("../templates/output_request.txt"),
        }
    }

    /// Whether a completion of this template is expected to contain code.
    pub fn produces_heuristic(self) -> bool {
        !matches!(
            self,
            TemplateId::CriticInitial
                | TemplateId::CriticBetter
                | TemplateId::CriticWorse
                | TemplateId::LtReflect
                | TemplateId::OutputRequest
        )
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        TemplateId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown template id `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RenderError {
    MissingBinding(String),
}

impl fmt::Display for RenderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenderError::MissingBinding(name) => write!(f, "no binding for placeholder `{{{name}}}`"),
        }
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase() || c == '_')
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Byte ranges `(start, end)` of each placeholder (braces included) in order.
fn placeholder_spans(template: &str) -> Vec<(usize, usize)> {
    let bytes = template.as_bytes();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            if let Some(len) = template[i + 1..].find('}') {
                if is_ident(&template[i + 1..i + 1 + len]) {
                    spans.push((i, i + len + 2));
                    i += len + 2;
                    continue;
                }
            }
        }
        i += 1;
    }
    spans
}

/// Placeholder names in order of first appearance.
pub fn placeholders(template: &str) -> Vec<&str> {
    let mut names: Vec<&str> = Vec::new();
    for (s, e) in placeholder_spans(template) {
        let name = &template[s + 1..e - 1];
        if !names.contains(&name) {
            names.push(name);
        }
    }
    names
}

/// Substitutes every placeholder; unused bindings are ignored.
pub fn render_text(template: &str, bindings: &[(&str, &str)]) -> Result<String, RenderError> {
    let mut out = String::with_capacity(template.len() + 256);
    let mut last = 0;
    for (s, e) in placeholder_spans(template) {
        let name = &template[s + 1..e - 1];
        let value = bindings
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| RenderError::MissingBinding(name.to_string()))?;
        out.push_str(&template[last..s]);
        out.push_str(value);
        last = e;
    }
    out.push_str(&template[last..]);
    Ok(out)
}

pub fn render(id: TemplateId, bindings: &[(&str, &str)]) -> Result<String, RenderError> {
    render_text(id.text(), bindings)
}

/// Problem-specific text shared by every heuristic-producing prompt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskPrompt {
    pub task_description: String,
    pub output_request: String,
    /// Short problem label for the reflection prompt.
    pub task_label: String,
}

fn describe_task(kind: ProblemKind, setting: Setting, framework: Framework) -> &'static str {
    use ProblemKind::*;
    use Setting::*;
    match (framework, setting, kind) {
        (Framework::Gls, _, _) => "Solving the Traveling Salesman Problem (TSP) with guided local search. The search repeatedly penalizes edges of its current local optimum, choosing those with the highest score relative to their penalty, so an edge should score high when including it in a tour is a bad idea. The goal is the shortest closed tour visiting every node once.",
        (_, WhiteBox, Tsp) => "Solving the Traveling Salesman Problem (TSP) with ant colony optimization. Ants build tours edge by edge, choosing the next node with probability proportional to pheromone times a heuristic score. Provide the heuristic score of every edge; higher means more promising. The goal is the shortest closed tour visiting every node once.",
        (_, WhiteBox, Cvrp) => "Solving the Capacitated Vehicle Routing Problem (CVRP) with ant colony optimization. Node 0 is the depot; every other node has a demand, and each route starts and ends at the depot with total demand at most the vehicle capacity. Ants build routes edge by edge with probability proportional to pheromone times a heuristic score. Provide the heuristic score of every edge; higher means more promising. The goal is the minimum total route length.",
        (_, WhiteBox, Op) => "Solving the Orienteering Problem (OP) with ant colony optimization. Node 0 is the depot; every node carries a prize, and a tour from the depot back to the depot may not exceed the maximum length. Ants extend the tour with probability proportional to pheromone times a heuristic score. Provide the heuristic score of every edge; higher means more promising. The goal is the maximum total collected prize.",
        (_, WhiteBox, Mkp) => "Solving the Multiple Knapsack Problem (MKP) with ant colony optimization. Each item has a value and a weight in each of m dimensions, and every dimension has a capacity. Ants add items with probability proportional to pheromone times a heuristic score while all capacities hold. Provide the heuristic score of every item; higher means more promising. The goal is the maximum total value of the selected items.",
        (_, WhiteBox, Bpp) => "Solving the offline Bin Packing Problem (BPP) with ant colony optimization. Items with given sizes are packed into bins of equal capacity. An ant opens a bin with the largest remaining item and keeps adding fitting items with probability proportional to pheromone times the summed heuristic score between the candidate and the items already in the bin. Provide the heuristic score of every item pair; higher means the pair should share a bin. The goal is the minimum number of bins.",
        (_, BlackBox, Tsp) => "Designing a scoring function for a stochastic constructive solver. The solver builds a solution element by element, choosing with probability proportional to a learned trail value times your score. Each edge carries one numeric attribute. Higher scores make an edge more likely to be chosen. Lower objective values are better.",
        (_, BlackBox, Cvrp) => "Designing a scoring function for a stochastic constructive solver. The solver builds a solution from pairwise links, choosing with probability proportional to a learned trail value times your score. You receive a pairwise attribute matrix and one attribute per node. Higher scores make a link more likely to be chosen. Lower objective values are better.",
        (_, BlackBox, Op) => "Designing a scoring function for a stochastic constructive solver. The solver builds a solution from pairwise links under a single scalar constraint, choosing with probability proportional to a learned trail value times your score. You receive node attributes, a pairwise attribute matrix and the constraint value. Higher scores make a link more likely to be chosen.",
        (_, BlackBox, Mkp) => "Designing a scoring function for a stochastic constructive solver. The solver picks items one at a time with probability proportional to a learned trail value times your score. Each item has one scalar attribute and a vector of secondary attributes. Higher scores make an item more likely to be picked.",
        (_, BlackBox, Bpp) => "Designing a scoring function for a stochastic constructive solver. The solver groups nodes under a shared constraint, and your pairwise score measures how well two nodes go together. You receive one attribute per node and the constraint value. Lower objective values are better.",
    }
}

fn io_description(kind: ProblemKind, setting: Setting, framework: Framework) -> (&'static str, &'static str) {
    use ProblemKind::*;
    use Setting::*;
    match (framework, setting, kind) {
        (Framework::Gls, _, _) | (_, WhiteBox, Tsp) => (
            "'heuristics_matrix'",
            "'distance_matrix' is an n-by-n numpy array of pairwise distances. 'heuristics_matrix' must be an n-by-n array of non-negative finite values.",
        ),
        (_, BlackBox, Tsp) => (
            "'heuristics'",
            "'edge_attr' is a numpy array of shape (n_edges, 1). 'heuristics' must be a flat array of n_edges non-negative finite values in the same order.",
        ),
        (_, WhiteBox, Cvrp) => (
            "'heuristics_matrix'",
            "'distance_matrix' is n-by-n, 'coordinates' is n-by-2, 'demands' has length n with demands[0] = 0 for the depot, and 'capacity' is a scalar. 'heuristics_matrix' must be an n-by-n array of non-negative finite values.",
        ),
        (_, BlackBox, Cvrp) => (
            "'heuristics_matrix'",
            "'edge_attr' is an n-by-n numpy array and 'node_attr' has length n. 'heuristics_matrix' must be an n-by-n array of non-negative finite values.",
        ),
        (_, WhiteBox, Op) => (
            "'heuristics_matrix'",
            "'prize' has length n, 'distance' is n-by-n, and 'maxlen' is the scalar length budget. 'heuristics_matrix' must be an n-by-n array of non-negative finite values.",
        ),
        (_, BlackBox, Op) => (
            "'heuristics_matrix'",
            "'node_attr' has length n, 'edge_attr' is n-by-n, and 'node_constraint' is a scalar. 'heuristics_matrix' must be an n-by-n array of non-negative finite values.",
        ),
        (_, WhiteBox, Mkp) => (
            "'heuristics'",
            "'prize' has length n and 'weight' has shape (n, m). 'heuristics' must be a length-n array of non-negative finite values.",
        ),
        (_, BlackBox, Mkp) => (
            "'heuristics'",
            "'item_attr1' has length n and 'item_attr2' has shape (n, m). 'heuristics' must be a length-n array of non-negative finite values.",
        ),
        (_, WhiteBox, Bpp) => (
            "'heuristics_matrix'",
            "'demand' has length n and 'capacity' is the scalar bin capacity. 'heuristics_matrix' must be an n-by-n array of non-negative finite values.",
        ),
        (_, BlackBox, Bpp) => (
            "'heuristics_matrix'",
            "'node_attr' has length n and 'node_constraint' is a scalar. 'heuristics_matrix' must be an n-by-n array of non-negative finite values.",
        ),
    }
}

impl TaskPrompt {
    pub fn new(signature: &HeuristicSignature) -> Self {
        let (kind, setting, framework) = (signature.kind, signature.setting, signature.framework);
        let inputs: Vec<String> = signature.params.iter().map(|p| format!("'{p}'")).collect();
        let inputs = inputs.join(", ");
        let n_inputs = format!("{}", signature.params.len());
        let (output, io_notes) = io_description(kind, setting, framework);
        let output_request = render(
            TemplateId::OutputRequest,
            &[
                ("func_name", "heuristics"),
                ("n_inputs", &n_inputs),
                ("inputs", &inputs),
                ("output", output),
                ("io_notes", io_notes),
            ],
        )
        .expect("all output request placeholders bound");
        let task_label = match setting {
            Setting::WhiteBox => format!("the {} problem", kind.name()),
            Setting::BlackBox => "a black-box scoring problem".to_string(),
        };
        Self {
            task_description: describe_task(kind, setting, framework).to_string(),
            output_request: output_request.trim_end().to_string(),
            task_label,
        }
    }
}
