//! EoH initialization and the E1, E2, M1 and M2 prompt operators.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::engine::{EngineError, Session, Stop};
use crate::heuristic::{HeuristicCandidate, Origin};
use crate::llm::TemplateId;
use crate::memory::format_objective;
use crate::population::Population;
use crate::selection::select_parents;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    E1,
    E2,
    M1,
    M2,
}

impl Operator {
    pub const ALL: [Operator; 4] = [Operator::E1, Operator::E2, Operator::M1, Operator::M2];

    pub fn template(self) -> TemplateId {
        match self {
            Operator::E1 => TemplateId::EohE1,
            Operator::E2 => TemplateId::EohE2,
            Operator::M1 => TemplateId::EohM1,
            Operator::M2 => TemplateId::EohM2,
        }
    }

    pub fn origin(self) -> Origin {
        match self {
            Operator::E1 => Origin::E1,
            Operator::E2 => Origin::E2,
            Operator::M1 => Origin::M1,
            Operator::M2 => Origin::M2,
        }
    }

    /// Parents consumed, given the configured crossover arity.
    pub fn arity(self, parents: usize) -> usize {
        match self {
            Operator::E1 | Operator::E2 => parents,
            Operator::M1 | Operator::M2 => 1,
        }
    }
}

/// Parent listing used by the crossover prompts.
pub fn render_parents(parents: &[&HeuristicCandidate]) -> String {
    let blocks: Vec<String> = parents
        .iter()
        .enumerate()
        .map(|(i, p)| {
            format!(
                "No. {} algorithm description: {}\nCode:\n{}\nObjective score: {}",
                i + 1,
                p.description,
                p.source,
                format_objective(p.prompt_objective())
            )
        })
        .collect();
    blocks.join("\n\n")
}

/// Requests one offspring; `Ok(None)` when the response was discarded.
pub fn apply_operator(session: &mut Session<'_>, op: Operator, parents: &[&HeuristicCandidate]) -> Result<Option<u64>, Stop> {
    let [task, output] = session.task_bindings();
    let (task, output) = (String::from(task.1), String::from(output.1));
    let mut bindings: Vec<(&str, String)> = Vec::new();
    match op {
        Operator::E1 | Operator::E2 => {
            bindings.push(("count", format!("{}", parents.len())));
            bindings.push(("parents", render_parents(parents)));
        }
        Operator::M1 | Operator::M2 => {
            bindings.push(("alg_description", parents[0].description.clone()));
            bindings.push(("code", parents[0].source.clone()));
        }
    }
    let mut b: Vec<(&str, &str)> = bindings.iter().map(|(k, v)| (*k, v.as_str())).collect();
    b.push(("task_description", &task));
    b.push(("output_request", &output));
    session.propose(op.template(), &b, None, op.origin())
}

/// Applies every operator `repeats` times to parents drawn from `population`.
pub fn generate(session: &mut Session<'_>, population: &Population, out: &mut Vec<u64>) -> Result<(), Stop> {
    let repeats = session.config.repeats();
    let parents = session.config.parents;
    for op in Operator::ALL {
        let arity = op.arity(parents);
        if population.len() < arity {
            log::info!("skipping {op:?}: population of {} is below arity {arity}", population.len());
            continue;
        }
        for _ in 0..repeats {
            let ranks = select_parents(population.len(), arity, &mut session.rng).expect("arity checked");
            let chosen: Vec<HeuristicCandidate> = ranks.iter().map(|&r| population.members()[r].clone()).collect();
            let refs: Vec<&HeuristicCandidate> = chosen.iter().collect();
            if let Some(id) = apply_operator(session, op, &refs)? {
                out.push(id);
            }
        }
    }
    Ok(())
}

/// Initial population, retrying once when every candidate is invalid.
///
/// A stop condition hit during initialization is returned alongside
/// whatever population could be formed.
pub fn init_population(session: &mut Session<'_>) -> Result<(Population, Option<Stop>), EngineError> {
    let size0 = session.config.initial_size;
    let capacity = session.config.population_size;
    let mut total = 0;
    for attempt in 1..=2 {
        let mut ids = Vec::with_capacity(size0);
        let mut stop = None;
        for _ in 0..size0 {
            let [task, output] = session.task_bindings();
            let (task, output) = (String::from(task.1), String::from(output.1));
            let b = [("task_description", task.as_str()), ("output_request", output.as_str())];
            match session.propose(TemplateId::EohInit, &b, None, Origin::Init) {
                Ok(Some(id)) => ids.push(id),
                Ok(None) => {}
                Err(e) => {
                    stop = Some(e);
                    break;
                }
            }
        }
        if let Err(e) = session.evaluate(&ids) {
            stop.get_or_insert(e);
        }
        total += ids.len();
        let pool: Vec<HeuristicCandidate> = ids.iter().map(|&id| session.candidate(id).clone()).collect();
        let population = Population::select(pool, capacity);
        if !population.is_empty() || stop.is_some() {
            return Ok((population, stop));
        }
        log::warn!("initial attempt {attempt} produced no valid heuristic");
    }
    Err(EngineError::NoValidInitial {
        attempts: 2,
        candidates: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristic::Lineage;

    #[test]
    fn arities() {
        assert_eq!(Operator::E2.arity(3), 3);
        assert_eq!(Operator::M2.arity(3), 1);
    }

    #[test]
    fn parent_listing_carries_descriptions_and_code() {
        let mut a = HeuristicCandidate::new(0, "alpha", "def h(d): return 2.5 * d", Lineage {
            origin: Origin::Init,
            generation: 0,
        });
        a.mark_valid(-3.0);
        let b = HeuristicCandidate::new(1, "beta", "def h(d): return d", a.lineage.clone());
        let text = render_parents(&[&a, &b]);
        assert!(text.contains("alpha") && text.contains("beta"));
        assert!(text.contains("2.5 * d"));
        assert!(text.contains("Objective score: 3.000000"));
        assert!(text.contains("Objective score: invalid"));
    }
}
