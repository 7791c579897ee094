//! Benchmarks of fixed heuristics on regenerated test sets.

use std::fmt;
use std::io;

use roco_core::aco::{AcoParams, Phase};
use roco_core::corpus::{self, CorpusEntry, Tier};
use roco_core::exact::held_karp;
use roco_core::exec::{execute_heuristic, instance_seed, solve, HeuristicRunner, SolverConfig};
use roco_core::gls::{run_gls, GlsParams};
use roco_core::heuristic::{Failure, Framework, Guidance, HeuristicSignature, Setting};
use roco_core::problem::{generate_instance, CopInstance, GeneratorConfig, ProblemKind};
use serde::Serialize;

use crate::parallel;
use crate::rundir::fixed6;

/// Instance-generation seed of the default test sets.
pub const DEFAULT_TEST_SEED: u64 = 1234;
/// Base solver seed of benchmark runs.
pub const DEFAULT_SOLVER_SEED: u64 = 7;
/// Test-set size used when none is given.
pub const DEFAULT_TEST_INSTANCES: usize = 64;
/// Largest size with an exact reference.
pub const MAX_EXACT_SIZE: usize = 20;

#[derive(Debug)]
pub enum BenchError {
    MissingEntry { wanted: String, available: Vec<String> },
    Instance(String),
    Heuristic { index: usize, failure: Failure },
    NoReference(usize),
    NoPreset(usize),
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchError::MissingEntry { wanted, available } => {
                write!(f, "no corpus heuristic for {wanted}; available: {}", available.join(", "))
            }
            BenchError::Instance(m) => write!(f, "instance generation failed: {m}"),
            BenchError::Heuristic { index, failure } => write!(f, "heuristic failed on instance {index}: {failure}"),
            BenchError::NoReference(n) => write!(f, "no exact reference for size {n} (limit {MAX_EXACT_SIZE})"),
            BenchError::NoPreset(n) => write!(f, "no guided local search preset for size {n}"),
        }
    }
}

impl std::error::Error for BenchError {}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusBench {
    pub kind: ProblemKind,
    pub setting: Setting,
    pub tier: Tier,
    pub instances: usize,
    pub instance_seed: u64,
    pub solver_seed: u64,
    /// Overrides of the testing-phase ant count and iterations.
    pub ants: Option<usize>,
    pub iterations: Option<usize>,
    pub threads: usize,
}

impl CorpusBench {
    pub fn new(kind: ProblemKind, setting: Setting, tier: Tier) -> Self {
        Self {
            kind,
            setting,
            tier,
            instances: DEFAULT_TEST_INSTANCES,
            instance_seed: DEFAULT_TEST_SEED,
            solver_seed: DEFAULT_SOLVER_SEED,
            ants: None,
            iterations: None,
            threads: parallel::default_threads(),
        }
    }

    pub fn entry(&self) -> Result<&'static CorpusEntry, BenchError> {
        corpus::find(self.kind, self.setting, Framework::Aco, self.tier).ok_or_else(|| BenchError::MissingEntry {
            wanted: format!("{}/{}/{:?}", self.kind, self.setting.name(), self.tier),
            available: corpus::catalogue().iter().map(|e| e.name.to_string()).collect(),
        })
    }

    pub fn params(&self) -> AcoParams {
        let base = AcoParams::preset(self.kind, Phase::Testing);
        AcoParams {
            n_ants: self.ants.unwrap_or(base.n_ants),
            n_iterations: self.iterations.unwrap_or(base.n_iterations),
            seed: self.solver_seed,
            ..base
        }
    }

    /// Raw objectives on a freshly generated test set of `size`.
    pub fn run(&self, size: usize, runner: &mut dyn HeuristicRunner) -> Result<Vec<f64>, BenchError> {
        let entry = self.entry()?;
        let signature = HeuristicSignature::new(self.kind, self.setting, Framework::Aco).map_err(BenchError::Instance)?;
        let instances = test_set(self.kind, size, self.instances, self.instance_seed)?;
        let guidance = guidance_for(entry.source, &instances, &signature, runner)?;
        let solver = SolverConfig::Aco(self.params());
        let pairs: Vec<(&CopInstance, Guidance)> = instances.iter().zip(guidance).collect();
        parallel::map(&pairs, self.threads, |i, (inst, g)| solve(inst, g, &solver, i))
            .into_iter()
            .enumerate()
            .map(|(index, r)| r.map_err(|failure| BenchError::Heuristic { index, failure }))
            .collect()
    }
}

pub fn test_set(kind: ProblemKind, size: usize, count: usize, seed: u64) -> Result<Vec<CopInstance>, BenchError> {
    (0..count as u64)
        .map(|i| generate_instance(kind, size, seed, i, &GeneratorConfig::default()))
        .collect::<Result<_, _>>()
        .map_err(|e| BenchError::Instance(e.to_string()))
}

fn guidance_for(
    source: &str,
    instances: &[CopInstance],
    signature: &HeuristicSignature,
    runner: &mut dyn HeuristicRunner,
) -> Result<Vec<Guidance>, BenchError> {
    let timeout = roco_core::exec::default_timeout_s(signature.kind);
    instances
        .iter()
        .enumerate()
        .map(|(index, inst)| {
            execute_heuristic(source, inst, signature, timeout, runner)
                .result
                .map_err(|failure| BenchError::Heuristic { index, failure })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapRow {
    pub size: usize,
    pub instances: usize,
    pub mean_length: f64,
    pub mean_optimum: f64,
    pub gap_percent: f64,
}

/// Optimality gap of the corpus GLS heuristic under the per-size preset.
///
/// Sizes below the smallest preset reuse it.
pub fn gls_gap(size: usize, count: usize, seed: u64, threads: usize, runner: &mut dyn HeuristicRunner) -> Result<GapRow, BenchError> {
    if size > MAX_EXACT_SIZE {
        return Err(BenchError::NoReference(size));
    }
    let preset = GlsParams::preset(size)
        .or_else(|| GlsParams::preset(MAX_EXACT_SIZE).filter(|_| size < MAX_EXACT_SIZE))
        .ok_or(BenchError::NoPreset(size))?;
    let entry = corpus::find(ProblemKind::Tsp, Setting::WhiteBox, Framework::Gls, Tier::Best).expect("gls corpus entry");
    let signature = HeuristicSignature::new(ProblemKind::Tsp, Setting::WhiteBox, Framework::Gls).expect("gls signature");
    let instances = test_set(ProblemKind::Tsp, size, count, seed)?;
    let guidance = guidance_for(entry.source, &instances, &signature, runner)?;
    let pairs: Vec<(&CopInstance, Guidance)> = instances.iter().zip(guidance).collect();
    let rows = parallel::map(&pairs, threads, |i, (inst, g)| {
        let dist = inst.distances().expect("tsp distances");
        let (opt, _) = held_karp(dist).expect("size within exact limit");
        let params = GlsParams {
            seed: instance_seed(DEFAULT_SOLVER_SEED, i),
            ..preset.clone()
        };
        let run = run_gls(dist, g.as_matrix().expect("matrix guidance"), &params, Some(opt));
        (run.length, opt)
    });
    let n = rows.len() as f64;
    let mean_length = rows.iter().map(|r| r.0).sum::<f64>() / n;
    let mean_optimum = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let gap_percent = rows.iter().map(|(l, o)| (l - o) / o * 100.0).sum::<f64>() / n;
    Ok(GapRow {
        size,
        instances: count,
        mean_length,
        mean_optimum,
        gap_percent,
    })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusRow {
    pub problem: ProblemKind,
    pub setting: Setting,
    pub heuristic: String,
    pub size: usize,
    pub instances: usize,
    pub instance_seed: u64,
    pub solver_seed: u64,
    pub mean_objective: f64,
}

pub fn write_corpus_csv<W: io::Write>(out: W, rows: &[CorpusRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["problem", "setting", "heuristic", "size", "instances", "instance_seed", "solver_seed", "mean_objective"])?;
    for r in rows {
        w.write_record([
            r.problem.to_string(),
            r.setting.name().to_string(),
            r.heuristic.clone(),
            r.size.to_string(),
            r.instances.to_string(),
            r.instance_seed.to_string(),
            r.solver_seed.to_string(),
            fixed6(Some(r.mean_objective)),
        ])?;
    }
    w.flush()
}

pub fn write_gap_csv<W: io::Write>(out: W, seed: u64, rows: &[GapRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["size", "instances", "instance_seed", "mean_length", "mean_optimum", "gap_percent"])?;
    for r in rows {
        w.write_record([
            r.size.to_string(),
            r.instances.to_string(),
            seed.to_string(),
            fixed6(Some(r.mean_length)),
            fixed6(Some(r.mean_optimum)),
            fixed6(Some(r.gap_percent)),
        ])?;
    }
    w.flush()
}
