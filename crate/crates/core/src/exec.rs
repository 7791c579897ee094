//! Executing heuristic sources and turning their guidance into fitness.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::aco::{run_aco, AcoParams};
use crate::gls::{run_gls, GlsParams};
use crate::heuristic::{entry_name, ArgValue, Failure, Framework, Guidance, HeuristicSignature};
use crate::problem::{CopInstance, ProblemKind};
use crate::rng;

/// One call of a heuristic's entry function.
#[derive(Clone, Debug, PartialEq)]
pub struct ExecRequest {
    pub entry: String,
    pub source: String,
    pub args: Vec<ArgValue>,
    pub timeout_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExecResponse {
    pub value: ArgValue,
    pub elapsed_s: f64,
}

/// Something that can run heuristic source code on numeric arguments.
pub trait HeuristicRunner {
    fn run(&mut self, request: &ExecRequest) -> Result<ExecResponse, Failure>;

    /// Runs independent requests; results are in request order.
    fn run_batch(&mut self, requests: &[ExecRequest]) -> Vec<Result<ExecResponse, Failure>> {
        requests.iter().map(|r| self.run(r)).collect()
    }
}

impl<R: HeuristicRunner + ?Sized> HeuristicRunner for &mut R {
    fn run(&mut self, request: &ExecRequest) -> Result<ExecResponse, Failure> {
        (**self).run(request)
    }

    fn run_batch(&mut self, requests: &[ExecRequest]) -> Vec<Result<ExecResponse, Failure>> {
        (**self).run_batch(requests)
    }
}

impl<R: HeuristicRunner + ?Sized> HeuristicRunner for Box<R> {
    fn run(&mut self, request: &ExecRequest) -> Result<ExecResponse, Failure> {
        (**self).run(request)
    }

    fn run_batch(&mut self, requests: &[ExecRequest]) -> Vec<Result<ExecResponse, Failure>> {
        (**self).run_batch(requests)
    }
}

/// Per-set execution time limit in seconds for a problem kind.
pub fn default_timeout_s(kind: ProblemKind) -> f64 {
    match kind {
        ProblemKind::Cvrp => 120.0,
        _ => 60.0,
    }
}

/// Default training set as `(instances, size)`.
pub fn default_training_shape(kind: ProblemKind, framework: Framework) -> (usize, usize) {
    match (framework, kind) {
        (Framework::Gls, _) => (10, 200),
        (_, ProblemKind::Cvrp) => (10, 50),
        (_, ProblemKind::Mkp) => (5, 100),
        (_, ProblemKind::Bpp) => (5, 500),
        _ => (5, 50),
    }
}

/// Result of running a heuristic on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceOutcome {
    pub result: Result<Guidance, Failure>,
    /// Negative entries clamped to zero.
    pub clamped: usize,
    pub elapsed_s: f64,
}

/// Results of running a heuristic on every instance of a set.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalOutcome {
    pub instances: Vec<InstanceOutcome>,
}

impl EvalOutcome {
    pub fn elapsed_s(&self) -> f64 {
        self.instances.iter().map(|o| o.elapsed_s).sum()
    }

    pub fn clamped(&self) -> usize {
        self.instances.iter().map(|o| o.clamped).sum()
    }

    pub fn first_failure(&self) -> Option<&Failure> {
        self.instances.iter().find_map(|o| o.result.as_ref().err())
    }
}

fn request_for(source: &str, instance: &CopInstance, signature: &HeuristicSignature, timeout_s: f64) -> ExecRequest {
    ExecRequest {
        entry: entry_name(source),
        source: source.into(),
        args: signature.arguments(instance),
        timeout_s,
    }
}

fn outcome_from(
    response: Result<ExecResponse, Failure>,
    instance: &CopInstance,
    signature: &HeuristicSignature,
    timeout_s: f64,
) -> InstanceOutcome {
    match response {
        Err(failure) => InstanceOutcome {
            result: Err(failure),
            clamped: 0,
            elapsed_s: 0.0,
        },
        Ok(resp) if resp.elapsed_s > timeout_s => InstanceOutcome {
            result: Err(Failure::Timeout),
            clamped: 0,
            elapsed_s: resp.elapsed_s,
        },
        Ok(resp) => match signature.to_guidance(instance, resp.value) {
            Ok((guidance, clamped)) => {
                if clamped > 0 {
                    log::warn!("clamped {clamped} negative guidance entries to zero");
                }
                InstanceOutcome {
                    result: Ok(guidance),
                    clamped,
                    elapsed_s: resp.elapsed_s,
                }
            }
            Err(failure) => InstanceOutcome {
                result: Err(failure),
                clamped: 0,
                elapsed_s: resp.elapsed_s,
            },
        },
    }
}

fn empty_source(source: &str) -> bool {
    source.trim().is_empty()
}

/// Runs `source` on one instance and validates its output.
pub fn execute_heuristic(
    source: &str,
    instance: &CopInstance,
    signature: &HeuristicSignature,
    timeout_s: f64,
    runner: &mut dyn HeuristicRunner,
) -> InstanceOutcome {
    if empty_source(source) {
        return outcome_from(Err(Failure::Exception("empty source".into())), instance, signature, timeout_s);
    }
    let response = runner.run(&request_for(source, instance, signature, timeout_s));
    outcome_from(response, instance, signature, timeout_s)
}

/// Runs `source` on every instance of a set as one batch.
///
/// Each request may use the whole limit; the summed time is checked too.
pub fn execute_on_set(
    source: &str,
    instances: &[CopInstance],
    signature: &HeuristicSignature,
    timeout_s: f64,
    runner: &mut dyn HeuristicRunner,
) -> EvalOutcome {
    if empty_source(source) {
        let failure = || Err(Failure::Exception("empty source".into()));
        return EvalOutcome {
            instances: instances
                .iter()
                .map(|inst| outcome_from(failure(), inst, signature, timeout_s))
                .collect(),
        };
    }
    let requests: Vec<ExecRequest> = instances
        .iter()
        .map(|inst| request_for(source, inst, signature, timeout_s))
        .collect();
    let responses = runner.run_batch(&requests);
    let mut outcome = EvalOutcome {
        instances: responses
            .into_iter()
            .zip(instances)
            .map(|(resp, inst)| outcome_from(resp, inst, signature, timeout_s))
            .collect(),
    };
    if outcome.first_failure().is_none() && outcome.elapsed_s() > timeout_s {
        if let Some(last) = outcome.instances.last_mut() {
            last.result = Err(Failure::Timeout);
        }
    }
    outcome
}

/// Metaheuristic and budget used to score guidance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "framework", rename_all = "lowercase")]
pub enum SolverConfig {
    Aco(AcoParams),
    Gls(GlsParams),
}

impl SolverConfig {
    pub fn framework(&self) -> Framework {
        match self {
            SolverConfig::Aco(_) => Framework::Aco,
            SolverConfig::Gls(_) => Framework::Gls,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            SolverConfig::Aco(p) => p.seed,
            SolverConfig::Gls(p) => p.seed,
        }
    }
}

/// Solver seed for the instance at position `index` of a set.
pub fn instance_seed(base: u64, index: usize) -> u64 {
    rng::derive(base, &format!("instance-{index}"))
}

/// Raw objective reached by the solver on one instance.
pub fn solve(
    instance: &CopInstance,
    guidance: &Guidance,
    solver: &SolverConfig,
    index: usize,
) -> Result<f64, Failure> {
    match solver {
        SolverConfig::Aco(params) => {
            let params = AcoParams {
                seed: instance_seed(params.seed, index),
                ..params.clone()
            };
            run_aco(instance, guidance, &params)
                .map(|run| run.best_objective)
                .map_err(|e| Failure::Solver(format!("{e}")))
        }
        SolverConfig::Gls(params) => {
            let dist = instance
                .distances()
                .ok_or_else(|| Failure::Solver("guided local search needs a routing instance".into()))?;
            let matrix = guidance
                .as_matrix()
                .ok_or_else(|| Failure::Solver("guided local search needs matrix guidance".into()))?;
            let params = GlsParams {
                seed: instance_seed(params.seed, index),
                ..params.clone()
            };
            Ok(run_gls(dist, matrix, &params, None).length)
        }
    }
}

/// Instances a candidate is scored on, with their calling convention.
#[derive(Clone, Debug)]
pub struct TrainingSet {
    pub instances: Vec<CopInstance>,
    pub signature: HeuristicSignature,
    pub timeout_s: f64,
}

impl TrainingSet {
    pub fn kind(&self) -> ProblemKind {
        self.signature.kind
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitnessReport {
    /// Mean oriented objective; higher is better.
    pub fitness: f64,
    /// Raw per-instance objectives.
    pub objectives: Vec<f64>,
    pub elapsed_s: f64,
    pub clamped: usize,
}

/// Orientation-corrected mean of raw objectives.
pub fn fitness_of(kind: ProblemKind, objectives: &[f64]) -> f64 {
    let sum: f64 = objectives.iter().map(|&o| kind.direction().orient(o)).sum();
    sum / objectives.len() as f64
}

/// Scores `source` on a training set; any failed instance fails the whole
/// candidate.
pub fn evaluate_fitness(
    source: &str,
    training: &TrainingSet,
    solver: &SolverConfig,
    runner: &mut dyn HeuristicRunner,
) -> Result<FitnessReport, Failure> {
    let outcome = execute_on_set(source, &training.instances, &training.signature, training.timeout_s, runner);
    score_outcome(&outcome, training, solver, solve)
}

/// Scores executed guidance with a caller-supplied solve function, so a
/// caller may run the per-instance solves concurrently.
pub fn score_outcome(
    outcome: &EvalOutcome,
    training: &TrainingSet,
    solver: &SolverConfig,
    mut solve_fn: impl FnMut(&CopInstance, &Guidance, &SolverConfig, usize) -> Result<f64, Failure>,
) -> Result<FitnessReport, Failure> {
    if let Some(failure) = outcome.first_failure() {
        return Err(failure.clone());
    }
    let objectives = outcome
        .instances
        .iter()
        .zip(&training.instances)
        .enumerate()
        .map(|(i, (o, inst))| solve_fn(inst, o.result.as_ref().expect("checked"), solver, i))
        .collect::<Result<Vec<f64>, Failure>>()?;
    finish_report(training.kind(), objectives, outcome)
}

pub fn finish_report(kind: ProblemKind, objectives: Vec<f64>, outcome: &EvalOutcome) -> Result<FitnessReport, Failure> {
    let fitness = fitness_of(kind, &objectives);
    if !fitness.is_finite() {
        return Err(Failure::Solver("non-finite objective".into()));
    }
    Ok(FitnessReport {
        fitness,
        objectives,
        elapsed_s: outcome.elapsed_s(),
        clamped: outcome.clamped(),
    })
}

/// Scores batches of candidate sources.
pub trait Evaluator {
    fn evaluate(&mut self, sources: &[&str]) -> Vec<Result<FitnessReport, Failure>>;
}

/// Sequential evaluator over any runner.
pub struct LocalEvaluator<R> {
    pub runner: R,
    pub training: TrainingSet,
    pub solver: SolverConfig,
}

impl<R: HeuristicRunner> Evaluator for LocalEvaluator<R> {
    fn evaluate(&mut self, sources: &[&str]) -> Vec<Result<FitnessReport, Failure>> {
        sources
            .iter()
            .map(|s| evaluate_fitness(s, &self.training, &self.solver, &mut self.runner))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aco::Phase;
    use crate::corpus::{find, NativeRunner, Tier};
    use crate::heuristic::Setting;
    use crate::problem::{generate_instance, GeneratorConfig};

    fn training(kind: ProblemKind, n: usize, count: u64) -> TrainingSet {
        TrainingSet {
            instances: (0..count)
                .map(|i| generate_instance(kind, n, 11, i, &GeneratorConfig::default()).unwrap())
                .collect(),
            signature: HeuristicSignature::new(kind, Setting::WhiteBox, Framework::Aco).unwrap(),
            timeout_s: default_timeout_s(kind),
        }
    }

    fn small_aco(kind: ProblemKind) -> SolverConfig {
        SolverConfig::Aco(AcoParams {
            n_ants: 10,
            n_iterations: 20,
            ..AcoParams::preset(kind, Phase::Evaluation)
        })
    }

    #[test]
    fn vanilla_fitness_is_negated_mean_length() {
        let set = training(ProblemKind::Tsp, 12, 3);
        let solver = small_aco(ProblemKind::Tsp);
        let src = find(ProblemKind::Tsp, Setting::WhiteBox, Framework::Aco, Tier::Vanilla).unwrap().source;
        let report = evaluate_fitness(src, &set, &solver, &mut NativeRunner::new()).unwrap();
        let mean = report.objectives.iter().sum::<f64>() / 3.0;
        assert!(report.fitness < 0.0);
        assert!((report.fitness + mean).abs() < 1e-12);
    }

    #[test]
    fn identical_sources_identical_fitness() {
        let set = training(ProblemKind::Mkp, 15, 2);
        let solver = small_aco(ProblemKind::Mkp);
        let src = find(ProblemKind::Mkp, Setting::WhiteBox, Framework::Aco, Tier::Best).unwrap().source;
        let a = evaluate_fitness(src, &set, &solver, &mut NativeRunner::new()).unwrap();
        let b = evaluate_fitness(src, &set, &solver, &mut NativeRunner::new()).unwrap();
        assert_eq!(a, b);
        assert!(a.fitness > 0.0);
    }

    #[test]
    fn failures_are_typed() {
        let set = training(ProblemKind::Tsp, 6, 2);
        let solver = small_aco(ProblemKind::Tsp);
        let mut runner = NativeRunner::new();
        assert_eq!(
            evaluate_fitness("   \n", &set, &solver, &mut runner),
            Err(Failure::Exception("empty source".into()))
        );
        assert!(matches!(
            evaluate_fitness("return 1/0", &set, &solver, &mut runner),
            Err(Failure::Exception(_))
        ));
    }

    struct Slow;

    impl HeuristicRunner for Slow {
        fn run(&mut self, request: &ExecRequest) -> Result<ExecResponse, Failure> {
            let n = request.args[0].as_matrix().unwrap().rows();
            Ok(ExecResponse {
                value: ArgValue::Matrix(crate::Matrix::filled(n, n, 1.0)),
                elapsed_s: 25.0,
            })
        }
    }

    #[test]
    fn summed_time_over_limit_is_timeout() {
        let set = training(ProblemKind::Tsp, 6, 3);
        let solver = small_aco(ProblemKind::Tsp);
        assert_eq!(evaluate_fitness("def h(d): pass", &set, &solver, &mut Slow), Err(Failure::Timeout));
        let set = training(ProblemKind::Tsp, 6, 2);
        assert!(evaluate_fitness("def h(d): pass", &set, &solver, &mut Slow).is_ok());
    }
}
