//! Candidate scoring with concurrent per-instance solves.

use roco_core::exec::{execute_on_set, finish_report, solve, Evaluator, FitnessReport, HeuristicRunner, SolverConfig, TrainingSet};
use roco_core::heuristic::Failure;

use crate::parallel;

/// Executes each candidate through `runner`, then solves the training
/// instances on `threads` threads.
pub struct ParallelEvaluator<R> {
    pub runner: R,
    pub training: TrainingSet,
    pub solver: SolverConfig,
    pub threads: usize,
}

impl<R: HeuristicRunner> ParallelEvaluator<R> {
    pub fn new(runner: R, training: TrainingSet, solver: SolverConfig) -> Self {
        Self {
            runner,
            training,
            solver,
            threads: parallel::default_threads(),
        }
    }

    fn score(&mut self, source: &str) -> Result<FitnessReport, Failure> {
        let t = &self.training;
        let outcome = execute_on_set(source, &t.instances, &t.signature, t.timeout_s, &mut self.runner);
        if let Some(f) = outcome.first_failure() {
            return Err(f.clone());
        }
        let solver = &self.solver;
        let objectives = parallel::map(&outcome.instances, self.threads, |i, o| {
            let guidance = o.result.as_ref().expect("checked above");
            solve(&t.instances[i], guidance, solver, i)
        })
        .into_iter()
        .collect::<Result<Vec<f64>, Failure>>()?;
        finish_report(t.kind(), objectives, &outcome)
    }
}

impl<R: HeuristicRunner> Evaluator for ParallelEvaluator<R> {
    fn evaluate(&mut self, sources: &[&str]) -> Vec<Result<FitnessReport, Failure>> {
        sources.iter().map(|s| self.score(s)).collect()
    }
}
