//! Run configuration file (TOML).

use std::fmt;
use std::path::{Path, PathBuf};

use roco_core::aco::{AcoParams, Phase};
use roco_core::engine::EngineConfig;
use roco_core::exec::{default_timeout_s, default_training_shape, SolverConfig, TrainingSet};
use roco_core::gls::GlsParams;
use roco_core::heuristic::{Framework, HeuristicSignature, Setting};
use roco_core::problem::{generate_instance, GeneratorConfig, ProblemKind};
use serde::{Deserialize, Serialize};

use crate::gateway::LiveConfig;
use crate::worker::WorkerCommand;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    #[serde(default = "white")]
    pub setting: Setting,
    #[serde(default = "aco")]
    pub framework: Framework,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub solver: SolverOverrides,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub executor: ExecutorConfig,
}

fn white() -> Setting {
    Setting::WhiteBox
}

fn aco() -> Framework {
    Framework::Aco
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub instances: Option<usize>,
    pub size: Option<usize>,
    pub seed: u64,
    /// Execution time limit for the whole set.
    pub timeout_s: Option<f64>,
    pub generator: GeneratorConfig,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            instances: None,
            size: None,
            seed: 1,
            timeout_s: None,
            generator: GeneratorConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOverrides {
    pub ants: Option<usize>,
    pub iterations: Option<usize>,
    pub perturbation_moves: Option<usize>,
    pub lambda: Option<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    /// Completions expected to contain a heuristic.
    pub heuristic_calls: usize,
    /// Critic and reflection completions.
    pub auxiliary_calls: usize,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self {
            heuristic_calls: 400,
            auxiliary_calls: 400,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    Replay,
    Live,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Recorded transcript for the replay backend.
    pub transcript: Option<PathBuf>,
    pub mock_seed: Option<u64>,
    pub mock_invalid_rate: f64,
    pub live: LiveConfig,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Mock,
            transcript: None,
            mock_seed: None,
            mock_invalid_rate: 0.1,
            live: LiveConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutorKind {
    /// Built-in ports of known sources.
    #[default]
    Native,
    /// External worker processes.
    Worker,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExecutorConfig {
    pub kind: ExecutorKind,
    pub command: Option<WorkerCommand>,
    pub workers: usize,
    /// Solver threads; defaults to the available parallelism.
    pub threads: Option<usize>,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        Self {
            kind: ExecutorKind::Native,
            command: None,
            workers: 1,
            threads: None,
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    /// Schema violation at a dotted field path.
    Field { path: String, message: String },
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            ConfigError::Field { path, message } => write!(f, "config field `{path}`: {message}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::Field {
            path: ".".into(),
            message: e.message().to_string(),
        })?;
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Field {
            path: e.path().to_string(),
            message: e.inner().message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.signature()?;
        self.engine.validate().map_err(ConfigError::Invalid)?;
        if self.backend.kind == BackendKind::Replay && self.backend.transcript.is_none() {
            return Err(ConfigError::Field {
                path: "backend.transcript".into(),
                message: "required by the replay backend".into(),
            });
        }
        if self.executor.kind == ExecutorKind::Worker && self.executor.command.is_none() {
            return Err(ConfigError::Field {
                path: "executor.command".into(),
                message: "required by the worker executor".into(),
            });
        }
        if !(0.0..=1.0).contains(&self.backend.mock_invalid_rate) {
            return Err(ConfigError::Field {
                path: "backend.mock_invalid_rate".into(),
                message: "must lie in [0, 1]".into(),
            });
        }
        Ok(())
    }

    pub fn signature(&self) -> Result<HeuristicSignature, ConfigError> {
        HeuristicSignature::new(self.problem, self.setting, self.framework).map_err(ConfigError::Invalid)
    }

    pub fn training_set(&self) -> Result<TrainingSet, ConfigError> {
        let signature = self.signature()?;
        let (count, size) = default_training_shape(self.problem, self.framework);
        let count = self.training.instances.unwrap_or(count);
        let size = self.training.size.unwrap_or(size);
        let instances = (0..count as u64)
            .map(|i| generate_instance(self.problem, size, self.training.seed, i, &self.training.generator))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ConfigError::Invalid(format!("training instances: {e}")))?;
        Ok(TrainingSet {
            instances,
            signature,
            timeout_s: self.training.timeout_s.unwrap_or_else(|| default_timeout_s(self.problem)),
        })
    }

    pub fn solver(&self) -> SolverConfig {
        let o = &self.solver;
        match self.framework {
            Framework::Aco => {
                let base = AcoParams::preset(self.problem, Phase::Evaluation);
                SolverConfig::Aco(AcoParams {
                    n_ants: o.ants.unwrap_or(base.n_ants),
                    n_iterations: o.iterations.unwrap_or(base.n_iterations),
                    seed: o.seed,
                    ..base
                })
            }
            Framework::Gls => {
                let base = GlsParams::training();
                SolverConfig::Gls(GlsParams {
                    n_iterations: o.iterations.unwrap_or(base.n_iterations),
                    perturbation_moves: o.perturbation_moves.unwrap_or(base.perturbation_moves),
                    lambda: o.lambda.unwrap_or(base.lambda),
                    seed: o.seed,
                })
            }
        }
    }

    pub fn mock_seed(&self) -> u64 {
        self.backend.mock_seed.unwrap_or(self.engine.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = RunConfig::parse("problem = \"tsp\"\n").unwrap();
        assert_eq!(cfg.setting, Setting::WhiteBox);
        assert_eq!(cfg.engine.population_size, 10);
        assert_eq!(cfg.engine.initial_size, 30);
        assert_eq!(cfg.engine.rounds, 3);
        assert_eq!(cfg.budget.heuristic_calls, 400);
        let set = cfg.training_set().unwrap();
        assert_eq!((set.instances.len(), set.instances[0].size()), (5, 50));
        let SolverConfig::Aco(p) = cfg.solver() else { panic!() };
        assert_eq!((p.n_ants, p.n_iterations), (30, 200));
    }

    #[test]
    fn errors_name_the_field() {
        let err = RunConfig::parse("problem = \"tsp\"\n[engine]\npopulation_size = \"ten\"\n").unwrap_err();
        let ConfigError::Field { path, .. } = err else { panic!("{err}") };
        assert_eq!(path, "engine.population_size");
        let err = RunConfig::parse("problem = \"tsp\"\n[budget]\nheuristic = 3\n").unwrap_err();
        assert!(err.to_string().contains("budget"), "{err}");
        let err = RunConfig::parse("problem = \"tsp\"\n[backend]\nkind = \"replay\"\n").unwrap_err();
        assert!(err.to_string().contains("backend.transcript"));
    }

    #[test]
    fn shipped_configs_parse() {
        let mock = RunConfig::parse(include_str!("../../../configs/tsp-mock.toml")).unwrap();
        assert_eq!(mock.engine.generations, 5);
        let live = RunConfig::parse(include_str!("../../../configs/tsp-live.toml")).unwrap();
        assert_eq!(live.backend.kind, BackendKind::Live);
    }

    #[test]
    fn gls_is_tsp_only() {
        let cfg = RunConfig::parse("problem = \"tsp\"\nframework = \"gls\"\n").unwrap();
        let SolverConfig::Gls(p) = cfg.solver() else { panic!() };
        assert_eq!(p.n_iterations, 1200);
        assert!(RunConfig::parse("problem = \"bpp\"\nframework = \"gls\"\n").is_err());
    }
}
