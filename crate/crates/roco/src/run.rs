//! Wiring of a configured evolution run to its backends and run directory.

use std::fmt;
use std::io;
use std::path::Path;

use roco_core::corpus::NativeRunner;
use roco_core::engine::{self, EngineError, RunSummary};
use roco_core::exec::Evaluator;
use roco_core::llm::{LanguageModel, Metered, MockModel, MockProfile};

use crate::config::{BackendKind, ConfigError, ExecutorKind, RunConfig};
use crate::evaluator::ParallelEvaluator;
use crate::gateway::{LiveModel, Recorder, ReplayModel};
use crate::parallel;
use crate::rundir::{RunDir, TRANSCRIPT_FILE};
use crate::worker::{WorkerError, WorkerPool};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Io(io::Error),
    Worker(WorkerError),
    Engine(EngineError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "{e}"),
            RunError::Worker(e) => write!(f, "{e}"),
            RunError::Engine(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

#[derive(Debug)]
pub struct EvolveReport {
    pub summary: RunSummary,
    pub heuristic_calls: usize,
    pub auxiliary_calls: usize,
}

/// Backend named by the config, before metering and recording.
pub fn backend(cfg: &RunConfig) -> Result<Box<dyn LanguageModel>, RunError> {
    Ok(match cfg.backend.kind {
        BackendKind::Mock => Box::new(MockModel::generative(MockProfile {
            kind: cfg.problem,
            setting: cfg.setting,
            framework: cfg.framework,
            seed: cfg.mock_seed(),
            invalid_rate: cfg.backend.mock_invalid_rate,
        })),
        BackendKind::Replay => {
            let path = cfg.backend.transcript.as_ref().expect("validated");
            Box::new(ReplayModel::from_file(path)?)
        }
        BackendKind::Live => Box::new(LiveModel::new(cfg.backend.live.clone())),
    })
}

/// Evaluator named by the config.
pub fn evaluator(cfg: &RunConfig) -> Result<Box<dyn Evaluator>, RunError> {
    let training = cfg.training_set().map_err(RunError::Config)?;
    let solver = cfg.solver();
    let threads = cfg.executor.threads.unwrap_or_else(parallel::default_threads);
    Ok(match cfg.executor.kind {
        ExecutorKind::Native => {
            let mut e = ParallelEvaluator::new(NativeRunner::new(), training, solver);
            e.threads = threads;
            Box::new(e)
        }
        ExecutorKind::Worker => {
            let cmd = cfg.executor.command.clone().expect("validated");
            let pool = WorkerPool::new(cmd, cfg.executor.workers).map_err(RunError::Worker)?;
            let mut e = ParallelEvaluator::new(pool, training, solver);
            e.threads = threads;
            Box::new(e)
        }
    })
}

/// Runs the configured evolution and persists everything under `out`.
pub fn evolve(cfg: &RunConfig, config_text: &str, out: &Path) -> Result<EvolveReport, RunError> {
    let signature = cfg.signature().map_err(RunError::Config)?;
    let inner = backend(cfg)?;
    let mut eval = evaluator(cfg)?;
    let dir = RunDir::create(out, config_text)?;
    let recorder = Recorder::to_file(inner, &dir.path(TRANSCRIPT_FILE))?;
    let mut llm = Metered::new(recorder, cfg.budget.heuristic_calls, cfg.budget.auxiliary_calls);
    let mut observer = dir.observer()?;
    let summary = engine::run(cfg.engine.clone(), &signature, &mut llm, eval.as_mut(), &mut observer).map_err(RunError::Engine)?;
    observer.finish()?;
    dir.write_results(&summary.population)?;
    log::info!(
        "heuristic calls {}/{}, auxiliary calls {}/{}, evaluations {}",
        llm.heuristic.used,
        llm.heuristic.cap,
        llm.auxiliary.used,
        llm.auxiliary.cap,
        summary.evaluations
    );
    Ok(EvolveReport {
        heuristic_calls: llm.heuristic.used,
        auxiliary_calls: llm.auxiliary.used,
        summary,
    })
}
