//! The generation loop: initial population, EoH operators, role-based
//! collaboration and top-N survival under call and evaluation budgets.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::collab;
use crate::critic::{self, CriticFeedback};
use crate::eoh;
use crate::exec::{Evaluator, FitnessReport};
use crate::heuristic::{Failure, HeuristicCandidate, HeuristicSignature, Lineage, Origin, Validity};
use crate::llm::{ChatRequest, LanguageModel, LlmError, Role, TemplateId};
use crate::memory::MemoryBank;
use crate::population::{Population, DEFAULT_SIZE};
use crate::prompt::{self, TaskPrompt};
use crate::rng::{self, Rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub population_size: usize,
    pub initial_size: usize,
    pub generations: usize,
    /// Collaboration rounds per generation.
    pub rounds: usize,
    /// Parents per E1/E2 prompt.
    pub parents: usize,
    /// Prompts per EoH operator per generation; defaults to the population size.
    pub eoh_repeats: Option<usize>,
    pub elite_power: f64,
    /// Whether the current population competes with the new candidates.
    pub keep_parents: bool,
    pub seed: u64,
    pub max_evaluations: usize,
    pub eoh: bool,
    pub collaboration: bool,
    pub mutation: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            population_size: DEFAULT_SIZE,
            initial_size: 30,
            generations: 20,
            rounds: 3,
            parents: 2,
            eoh_repeats: None,
            elite_power: crate::selection::ELITE_POWER,
            keep_parents: true,
            seed: 0,
            max_evaluations: 400,
            eoh: true,
            collaboration: true,
            mutation: true,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("population_size", self.population_size),
            ("initial_size", self.initial_size),
            ("rounds", self.rounds),
            ("parents", self.parents),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(format!("{name} must be at least 1"));
            }
        }
        if !(self.elite_power.is_finite() && self.elite_power > 0.0) {
            return Err("elite_power must be a positive finite number".into());
        }
        Ok(())
    }

    pub fn repeats(&self) -> usize {
        self.eoh_repeats.unwrap_or(self.population_size)
    }
}

/// Why a run ended before its last generation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stop {
    Llm(LlmError),
    EvaluationCap(usize),
}

impl fmt::Display for Stop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stop::Llm(e) => write!(f, "{e}"),
            Stop::EvaluationCap(cap) => write!(f, "evaluation cap of {cap} reached"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EngineError {
    Config(String),
    NoValidInitial { attempts: usize, candidates: usize },
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Config(m) => write!(f, "invalid engine config: {m}"),
            EngineError::NoValidInitial { attempts, candidates } => write!(
                f,
                "no valid heuristic among {candidates} initial candidates after {attempts} attempts"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// 1-based count of executed evaluations.
    pub evaluation: usize,
    pub candidate: u64,
    pub fitness: Option<f64>,
    pub best_fitness: Option<f64>,
}

/// Receives progress as it happens; the std crate persists it.
pub trait RunObserver {
    fn on_evaluation(&mut self, _point: &CurvePoint, _candidate: &HeuristicCandidate) {}
    fn on_generation(&mut self, _generation: usize, _population: &Population) {}
}

/// Observer that ignores everything.
pub struct NullObserver;

impl RunObserver for NullObserver {}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub population: Population,
    pub generations_completed: usize,
    pub stop: Option<Stop>,
    pub evaluations: usize,
    pub candidates: Vec<HeuristicCandidate>,
    pub curve: Vec<CurvePoint>,
    pub memory: MemoryBank,
}

/// Mutable state shared by all operators of a run.
///
/// Candidates live in an arena indexed by their id.
pub struct Session<'a> {
    pub config: EngineConfig,
    pub task: TaskPrompt,
    pub rng: Rng,
    pub generation: usize,
    llm: &'a mut dyn LanguageModel,
    evaluator: &'a mut dyn Evaluator,
    observer: &'a mut dyn RunObserver,
    candidates: Vec<HeuristicCandidate>,
    cache: BTreeMap<String, Result<FitnessReport, Failure>>,
    evaluations: usize,
    best: Option<f64>,
    curve: Vec<CurvePoint>,
}

const NEUTRAL_REFLECTION: &str = "No reflection available for this comparison.";
const NEUTRAL_CRITIQUE: &str = "Refine the stronger heuristic and keep its core scoring idea.";

impl<'a> Session<'a> {
    pub fn new(
        config: EngineConfig,
        signature: &HeuristicSignature,
        llm: &'a mut dyn LanguageModel,
        evaluator: &'a mut dyn Evaluator,
        observer: &'a mut dyn RunObserver,
    ) -> Self {
        let rng = rng::stream(rng::derive(config.seed, "engine"), 0);
        Self {
            config,
            task: TaskPrompt::new(signature),
            rng,
            generation: 0,
            llm,
            evaluator,
            observer,
            candidates: Vec::new(),
            cache: BTreeMap::new(),
            evaluations: 0,
            best: None,
            curve: Vec::new(),
        }
    }

    pub fn candidate(&self, id: u64) -> &HeuristicCandidate {
        &self.candidates[id as usize]
    }

    pub fn candidates(&self) -> &[HeuristicCandidate] {
        &self.candidates
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Sends a rendered template. `Ok(None)` is a transport failure that
    /// costs only the current step.
    pub fn ask(&mut self, template: TemplateId, bindings: &[(&str, &str)], role: Option<Role>) -> Result<Option<String>, Stop> {
        let text = prompt::render(template, bindings).expect("templates are bound by their callers");
        let request = ChatRequest::new(template, text, role, self.generation);
        match self.llm.complete(&request) {
            Ok(r) => Ok(Some(r)),
            Err(LlmError::Transport(m)) => {
                log::warn!("{template} request lost: {m}");
                Ok(None)
            }
            Err(e) => Err(Stop::Llm(e)),
        }
    }

    /// Asks for a heuristic, reprompting once on an unparseable response.
    pub fn propose(
        &mut self,
        template: TemplateId,
        bindings: &[(&str, &str)],
        role: Option<Role>,
        origin: Origin,
    ) -> Result<Option<u64>, Stop> {
        for attempt in 0..2 {
            let Some(response) = self.ask(template, bindings, role)? else {
                return Ok(None);
            };
            match critic::extract_candidate(&response) {
                Ok(x) => {
                    let id = self.candidates.len() as u64;
                    let lineage = Lineage {
                        origin,
                        generation: self.generation,
                    };
                    self.candidates.push(HeuristicCandidate::new(id, x.description, x.source, lineage));
                    return Ok(Some(id));
                }
                Err(e) => log::info!("{template} response unusable on attempt {}: {e}", attempt + 1),
            }
        }
        Ok(None)
    }

    /// Critic feedback, reprompting once before falling back to neutral text.
    pub fn critique(&mut self, template: TemplateId, bindings: &[(&str, &str)]) -> Result<CriticFeedback, Stop> {
        for _ in 0..2 {
            let Some(response) = self.ask(template, bindings, Some(Role::Critic))? else {
                break;
            };
            match critic::parse_critic(&response) {
                Ok(fb) => return Ok(fb),
                Err(e) => log::info!("critic response unusable: {e}"),
            }
        }
        log::warn!("using neutral critic feedback");
        Ok(CriticFeedback {
            reflection: NEUTRAL_REFLECTION.into(),
            critique: NEUTRAL_CRITIQUE.into(),
        })
    }

    /// Long-term reflection text; an untagged response is kept verbatim.
    pub fn reflect(&mut self, bindings: &[(&str, &str)], role: Role) -> Result<Option<String>, Stop> {
        let Some(response) = self.ask(TemplateId::LtReflect, bindings, Some(role))? else {
            return Ok(None);
        };
        Ok(Some(match critic::parse_ans(&response) {
            Ok(a) => a,
            Err(_) => String::from(response.trim()),
        }))
    }

    /// Scores every pending candidate in `ids`.
    ///
    /// Sources already scored reuse the cached result without counting as an
    /// evaluation. When the evaluation cap cuts a batch short, the remaining
    /// candidates stay pending.
    pub fn evaluate(&mut self, ids: &[u64]) -> Result<(), Stop> {
        let pending: Vec<u64> = ids
            .iter()
            .copied()
            .filter(|&id| *self.candidate(id).validity() == Validity::Pending)
            .collect();
        let mut fresh: Vec<(String, u64)> = Vec::new();
        for &id in &pending {
            let hash = self.candidate(id).source_hash();
            if !self.cache.contains_key(&hash) && !fresh.iter().any(|(h, _)| *h == hash) {
                fresh.push((hash, id));
            }
        }
        let room = self.config.max_evaluations.saturating_sub(self.evaluations);
        let capped = fresh.len() > room;
        fresh.truncate(room);
        if !fresh.is_empty() {
            let sources: Vec<&str> = fresh.iter().map(|&(_, id)| self.candidates[id as usize].source.as_str()).collect();
            let reports = self.evaluator.evaluate(&sources);
            for ((hash, id), report) in fresh.into_iter().zip(reports) {
                self.cache.insert(hash, report);
                self.apply_cached(id);
                self.evaluations += 1;
                let c = &self.candidates[id as usize];
                if let Some(f) = c.fitness() {
                    self.best = Some(self.best.map_or(f, |b| b.max(f)));
                }
                let point = CurvePoint {
                    evaluation: self.evaluations,
                    candidate: id,
                    fitness: c.fitness(),
                    best_fitness: self.best,
                };
                self.observer.on_evaluation(&point, c);
                self.curve.push(point);
            }
        }
        for id in pending {
            self.apply_cached(id);
        }
        if capped {
            return Err(Stop::EvaluationCap(self.config.max_evaluations));
        }
        Ok(())
    }

    fn apply_cached(&mut self, id: u64) {
        let c = &mut self.candidates[id as usize];
        if *c.validity() != Validity::Pending {
            return;
        }
        match self.cache.get(&c.source_hash()) {
            Some(Ok(report)) => c.mark_valid(report.fitness),
            Some(Err(failure)) => {
                log::debug!("candidate {} invalid: {failure}", c.id);
                c.mark_invalid(failure.clone());
            }
            None => {}
        }
    }

    pub fn task_bindings(&self) -> [(&'static str, &str); 2] {
        [
            ("task_description", self.task.task_description.as_str()),
            ("output_request", self.task.output_request.as_str()),
        ]
    }
}

fn combine(first: Option<Stop>, second: Result<(), Stop>) -> Option<Stop> {
    first.or(second.err())
}

/// Runs initialization and up to `config.generations` generations.
///
/// A terminal LLM error or the evaluation cap ends the run after the
/// candidates produced so far are scored and merged.
pub fn run(
    config: EngineConfig,
    signature: &HeuristicSignature,
    llm: &mut dyn LanguageModel,
    evaluator: &mut dyn Evaluator,
    observer: &mut dyn RunObserver,
) -> Result<RunSummary, EngineError> {
    config.validate().map_err(EngineError::Config)?;
    let mut s = Session::new(config, signature, llm, evaluator, observer);
    let mut memory = MemoryBank::default();

    let (mut population, mut stop) = eoh::init_population(&mut s)?;
    s.observer.on_generation(0, &population);
    let mut completed = 0;

    while stop.is_none() && completed < s.config.generations {
        s.generation = completed + 1;
        let mut produced: Vec<u64> = Vec::new();
        if s.config.eoh {
            let r = eoh::generate(&mut s, &population, &mut produced);
            stop = combine(r.err(), s.evaluate(&produced));
        }
        if stop.is_none() && s.config.collaboration && population.len() >= 2 {
            stop = collab::collaborate(&mut s, &population, &mut memory, &mut produced).err();
        }
        if stop.as_ref().is_some_and(|st| matches!(st, Stop::Llm(_))) {
            stop = combine(stop, s.evaluate(&produced));
        }
        let pool: Vec<HeuristicCandidate> = produced.iter().map(|&id| s.candidate(id).clone()).collect();
        population = population.merge(pool, s.config.keep_parents);
        debug_assert!(population.invariants_hold());
        memory.end_generation();
        completed += 1;
        s.observer.on_generation(completed, &population);
    }
    if let Some(st) = &stop {
        log::info!("run stopped after {completed} generations: {st}");
    }
    Ok(RunSummary {
        population,
        generations_completed: completed,
        stop,
        evaluations: s.evaluations,
        candidates: s.candidates,
        curve: s.curve,
        memory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NativeRunner;
    use crate::exec::{default_timeout_s, LocalEvaluator, SolverConfig, TrainingSet};
    use crate::heuristic::{Framework, Setting};
    use crate::llm::{Metered, MockModel};
    use crate::problem::{generate_instance, GeneratorConfig, ProblemKind};
    use crate::aco::{AcoParams, Phase};

    fn evaluator(kind: ProblemKind, sig: &HeuristicSignature) -> LocalEvaluator<NativeRunner> {
        LocalEvaluator {
            runner: NativeRunner::new(),
            training: TrainingSet {
                instances: (0..2)
                    .map(|i| generate_instance(kind, 10, 5, i, &GeneratorConfig::default()).unwrap())
                    .collect(),
                signature: sig.clone(),
                timeout_s: default_timeout_s(kind),
            },
            solver: SolverConfig::Aco(AcoParams {
                n_ants: 5,
                n_iterations: 5,
                ..AcoParams::preset(kind, Phase::Evaluation)
            }),
        }
    }

    fn small_config() -> EngineConfig {
        EngineConfig {
            population_size: 4,
            initial_size: 6,
            generations: 2,
            rounds: 2,
            eoh_repeats: Some(2),
            seed: 3,
            ..EngineConfig::default()
        }
    }

    fn run_once(cfg: EngineConfig, cap: usize) -> (RunSummary, usize) {
        let sig = HeuristicSignature::new(ProblemKind::Tsp, Setting::WhiteBox, Framework::Aco).unwrap();
        let mut llm = Metered::new(MockModel::for_signature(&sig, 3), cap, 1000);
        let mut ev = evaluator(ProblemKind::Tsp, &sig);
        let summary = run(cfg, &sig, &mut llm, &mut ev, &mut NullObserver).unwrap();
        (summary, llm.heuristic.used)
    }

    #[test]
    fn small_run_is_deterministic_and_sound() {
        let (a, _) = run_once(small_config(), 400);
        let (b, _) = run_once(small_config(), 400);
        assert_eq!(a.population, b.population);
        assert_eq!(a.curve, b.curve);
        assert_eq!(a.generations_completed, 2);
        assert!(a.stop.is_none());
        assert!(a.population.invariants_hold());
        assert!(a.curve.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness));
        assert_eq!(a.memory.explorer.history.len(), 2);
    }

    #[test]
    fn heuristic_cap_is_exact() {
        let (s, used) = run_once(small_config(), 9);
        assert_eq!(used, 9);
        assert!(matches!(s.stop, Some(Stop::Llm(LlmError::BudgetExhausted { .. }))));
        assert!(!s.population.is_empty() && s.population.invariants_hold());
    }

    #[test]
    fn evaluation_cap_is_exact() {
        let cfg = EngineConfig {
            max_evaluations: 5,
            ..small_config()
        };
        let (s, _) = run_once(cfg, 400);
        assert_eq!(s.evaluations, 5);
        assert_eq!(s.stop, Some(Stop::EvaluationCap(5)));
        assert!(s.population.members().iter().all(|c| c.is_valid()));
    }

    #[test]
    fn config_validation() {
        let bad = EngineConfig {
            parents: 0,
            ..EngineConfig::default()
        };
        assert!(bad.validate().unwrap_err().contains("parents"));
    }
}
