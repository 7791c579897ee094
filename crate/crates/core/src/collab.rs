//! Critic-guided explorer/exploiter rounds, integrator fusion, long-term
//! reflection and memory-guided elite mutation for one generation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::critic::CriticFeedback;
use crate::engine::{Session, Stop};
use crate::heuristic::{HeuristicCandidate, Origin, Validity};
use crate::llm::{Role, TemplateId};
use crate::memory::{format_objective, MemoryBank, ShortTermEntry};
use crate::population::Population;
use crate::selection::elite_pair_select;

const MUTATION_ROLES: [Role; 3] = [Role::Explorer, Role::Exploiter, Role::Integrator];

fn role_description(role: Role) -> &'static str {
    match role {
        Role::Explorer => "(who searches for diverse, long-term directions)",
        Role::Exploiter => "(who refines the current heuristic for short-term gains)",
        Role::Integrator => "(who combines the strengths of both)",
        Role::Critic => "(who compares candidates)",
    }
}

fn memory_name(role: Role) -> &'static str {
    role.name()
}

/// Orders by fitness with invalid candidates lowest.
fn score(c: &HeuristicCandidate) -> f64 {
    c.fitness().unwrap_or(f64::NEG_INFINITY)
}

fn failure_clause(label: &str, c: &HeuristicCandidate) -> Option<String> {
    match c.validity() {
        Validity::Invalid(f) => Some(format!("Note: the {label} code is invalid, it failed with {}: {f}.", f.label())),
        _ => None,
    }
}

/// Candidates of one collaboration that survive into the generation pool.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CollabResult {
    pub explorer: Option<u64>,
    pub exploiter: Option<u64>,
    pub integrator: Option<u64>,
    pub elite_fusion: Option<u64>,
    pub mutations: Vec<u64>,
    /// Population ranks of the collaborating pair.
    pub pair: Option<(usize, usize)>,
}

impl CollabResult {
    pub fn ids(&self) -> Vec<u64> {
        let mut v: Vec<u64> = [self.explorer, self.exploiter, self.integrator, self.elite_fusion]
            .into_iter()
            .flatten()
            .collect();
        v.extend(&self.mutations);
        v
    }
}

struct Ctx<'s, 'a> {
    s: &'s mut Session<'a>,
    task: String,
    output: String,
}

impl Ctx<'_, '_> {
    fn get(&self, id: u64) -> HeuristicCandidate {
        self.s.candidate(id).clone()
    }

    fn initial_critic(&mut self, h1: &HeuristicCandidate, h2: &HeuristicCandidate) -> Result<CriticFeedback, Stop> {
        let (better, worse) = if score(h2) > score(h1) { (h2, h1) } else { (h1, h2) };
        if score(h1) == score(h2) {
            log::debug!("elite pair tie, first member treated as better");
        }
        let (bo, wo) = (format_objective(better.prompt_objective()), format_objective(worse.prompt_objective()));
        let task = self.task.clone();
        self.s.critique(
            TemplateId::CriticInitial,
            &[
                ("task_description", &task),
                ("first_code", &better.source),
                ("first_objective", &bo),
                ("second_code", &worse.source),
                ("second_objective", &wo),
            ],
        )
    }

    /// Critic comparison of the previous explorer against the previous exploiter.
    fn round_critic(&mut self, prev: &HeuristicCandidate, curr: &HeuristicCandidate) -> Result<CriticFeedback, Stop> {
        let curr_better = score(curr) > score(prev);
        let (template, worse, better) = if curr_better {
            (TemplateId::CriticBetter, prev, curr)
        } else {
            (TemplateId::CriticWorse, curr, prev)
        };
        let clauses: Vec<String> = [failure_clause("worse", worse), failure_clause("better", better)]
            .into_iter()
            .flatten()
            .collect();
        let invalid = clauses.join(" ");
        let (wo, bo) = (format_objective(worse.prompt_objective()), format_objective(better.prompt_objective()));
        let task = self.task.clone();
        self.s.critique(
            template,
            &[
                ("task_description", &task),
                ("first_alg", &worse.description),
                ("first_code", &worse.source),
                ("first_obj", &wo),
                ("second_alg", &better.description),
                ("second_code", &better.source),
                ("second_obj", &bo),
                ("invalid_ind_prompt", &invalid),
            ],
        )
    }

    fn role_step(&mut self, role: Role, base: &HeuristicCandidate, fb: &CriticFeedback, origin: Origin) -> Result<Option<u64>, Stop> {
        let template = match role {
            Role::Explorer => TemplateId::Explorer,
            _ => TemplateId::Exploiter,
        };
        let obj = format_objective(base.prompt_objective());
        let (task, output) = (self.task.clone(), self.output.clone());
        self.s.propose(
            template,
            &[
                ("task_description", &task),
                ("alg_description", &base.description),
                ("code", &base.source),
                ("obj", &obj),
                ("cri_response", &fb.critique),
                ("reflection", &fb.reflection),
                ("output_request", &output),
            ],
            Some(role),
            origin,
        )
    }

    fn integrate(&mut self, e: &HeuristicCandidate, x: &HeuristicCandidate, round: usize) -> Result<Option<u64>, Stop> {
        let (eo, xo) = (format_objective(e.prompt_objective()), format_objective(x.prompt_objective()));
        let (task, output) = (self.task.clone(), self.output.clone());
        self.s.propose(
            TemplateId::Integrator,
            &[
                ("task_description", &task),
                ("explorer_algorithm", &e.description),
                ("explorer_code", &e.source),
                ("explorer_obj", &eo),
                ("exploiter_algorithm", &x.description),
                ("exploiter_code", &x.source),
                ("exploiter_obj", &xo),
                ("output_request", &output),
            ],
            Some(Role::Integrator),
            Origin::Integrator { round },
        )
    }

    fn elite_fusion(&mut self, e: &HeuristicCandidate, x: &HeuristicCandidate, summary: &str) -> Result<Option<u64>, Stop> {
        let (eo, xo) = (format_objective(e.prompt_objective()), format_objective(x.prompt_objective()));
        let (task, output) = (self.task.clone(), self.output.clone());
        self.s.propose(
            TemplateId::EliteIntegrator,
            &[
                ("task_description", &task),
                ("explorer_code", &e.source),
                ("explorer_obj", &eo),
                ("exploiter_code", &x.source),
                ("exploiter_obj", &xo),
                ("summary", summary),
                ("output_request", &output),
            ],
            Some(Role::Integrator),
            Origin::EliteFusion,
        )
    }
}

/// Highest-fitness valid candidate, earliest first on ties.
pub fn best_of(candidates: &[HeuristicCandidate]) -> Option<&HeuristicCandidate> {
    candidates
        .iter()
        .filter(|c| c.is_valid())
        .fold(None, |best: Option<&HeuristicCandidate>, c| match best {
            Some(b) if score(b) >= score(c) => Some(b),
            _ => Some(c),
        })
}

/// Runs one collaboration on an elite pair drawn from `population` and
/// appends the resulting candidates to `out`, also when a stop condition
/// interrupts it.
pub fn collaborate(
    session: &mut Session<'_>,
    population: &Population,
    memory: &mut MemoryBank,
    out: &mut Vec<u64>,
) -> Result<CollabResult, Stop> {
    let mut result = CollabResult::default();
    let r = run(session, population, memory, &mut result);
    out.extend(result.ids());
    r.map(|()| result)
}

fn run(session: &mut Session<'_>, population: &Population, memory: &mut MemoryBank, result: &mut CollabResult) -> Result<(), Stop> {
    let power = session.config.elite_power;
    let rounds = session.config.rounds;
    let mutate = session.config.mutation;
    let pair = elite_pair_select(population.len(), power, &mut session.rng).expect("caller checks population size");
    result.pair = Some((pair.first, pair.second));
    let h1 = population.members()[pair.first].clone();
    let h2 = population.members()[pair.second].clone();
    let task = session.task.task_description.clone();
    let output = session.task.output_request.clone();
    let label = session.task.task_label.clone();
    let mut cx = Ctx { s: session, task, output };

    let f_init = cx.initial_critic(&h1, &h2)?;
    let e0 = cx.role_step(Role::Explorer, &h2, &f_init, Origin::Explorer { round: 0 })?;
    let x0 = cx.role_step(Role::Exploiter, &h2, &f_init, Origin::Exploiter { round: 0 })?;
    let mut explorer = e0.unwrap_or(h2.id);
    let mut exploiter = x0.unwrap_or(h2.id);
    result.explorer = e0;
    result.exploiter = x0;
    cx.s.evaluate(&[explorer, exploiter])?;
    let (h0_explorer, h0_exploiter) = (cx.get(explorer), cx.get(exploiter));

    let mut explorer_rounds: Vec<HeuristicCandidate> = Vec::new();
    let mut exploiter_rounds: Vec<HeuristicCandidate> = Vec::new();
    for t in 1..=rounds {
        let (prev_e, prev_x) = (cx.get(explorer), cx.get(exploiter));
        let fb = cx.round_critic(&prev_e, &prev_x)?;
        let e = cx.role_step(Role::Explorer, &prev_e, &fb, Origin::Explorer { round: t })?;
        if let Some(id) = e {
            explorer = id;
            result.explorer = Some(id);
        }
        let x = cx.role_step(Role::Exploiter, &prev_x, &fb, Origin::Exploiter { round: t })?;
        if let Some(id) = x {
            exploiter = id;
            result.exploiter = Some(id);
        }
        cx.s.evaluate(&[explorer, exploiter])?;
        let (cur_e, cur_x) = (cx.get(explorer), cx.get(exploiter));
        if e.is_some() {
            explorer_rounds.push(cur_e.clone());
        }
        if x.is_some() {
            exploiter_rounds.push(cur_x.clone());
        }
        if let Some(id) = cx.integrate(&cur_e, &cur_x, t)? {
            result.integrator = Some(id);
            cx.s.evaluate(&[id])?;
        }
        for (mem, prev, cur) in [(&mut memory.explorer, &prev_e, &cur_e), (&mut memory.exploiter, &prev_x, &cur_x)] {
            mem.short_term.push(ShortTermEntry {
                round: t,
                reflection: fb.reflection.clone(),
                prev_obj: prev.prompt_objective(),
                curr_obj: cur.prompt_objective(),
            });
        }
    }

    let best_e = best_of(&explorer_rounds).or_else(|| Some(&h0_explorer).filter(|c| c.is_valid())).cloned();
    let best_x = best_of(&exploiter_rounds).or_else(|| Some(&h0_exploiter).filter(|c| c.is_valid())).cloned();
    match (&best_e, &best_x) {
        (Some(e), Some(x)) => {
            let summary: Vec<String> = memory
                .explorer
                .short_term
                .iter()
                .map(|s| format!("Round {}: {}", s.round, s.reflection))
                .collect();
            result.elite_fusion = cx.elite_fusion(e, x, &summary.join("\n"))?;
        }
        (Some(only), None) | (None, Some(only)) => {
            log::info!("one role has no valid candidate, elite fusion copies candidate {}", only.id);
            result.elite_fusion = Some(only.id);
        }
        (None, None) => log::info!("no valid role candidate, elite fusion skipped"),
    }

    for role in [Role::Explorer, Role::Exploiter] {
        let m = memory.get(role).expect("role memory");
        if m.short_term.is_empty() {
            continue;
        }
        let short = m.render_short_term();
        let lt = cx.s.reflect(
            &[
                ("task_description", &label),
                ("reflection", &short),
                ("role", role.name()),
                ("role_description", role_description(role)),
            ],
            role,
        )?;
        memory.get_mut(role).expect("role memory").long_term = lt;
    }
    memory.merge_long_term();

    if mutate {
        for base in [&h1, &h2] {
            for role in MUTATION_ROLES {
                let m = memory.get(role).expect("role memory");
                let Some(lt) = m.long_term.clone() else {
                    continue;
                };
                let history = m.render_history();
                let (task, output) = (cx.task.clone(), cx.output.clone());
                let id = cx.s.propose(
                    TemplateId::EliteMutation,
                    &[
                        ("task_description", &task),
                        ("history_reflection", &history),
                        ("reflection", &lt),
                        ("elitist_code", &base.source),
                        ("output_request", &output),
                    ],
                    Some(role),
                    Origin::Mutation {
                        memory: String::from(memory_name(role)),
                        base: if base.id == h1.id { 1 } else { 2 },
                    },
                )?;
                result.mutations.extend(id);
            }
        }
    }
    let tail: Vec<u64> = result.mutations.iter().copied().chain(result.elite_fusion).collect();
    cx.s.evaluate(&tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristic::{Failure, Lineage};

    fn cand(id: u64, f: Option<f64>) -> HeuristicCandidate {
        let mut c = HeuristicCandidate::new(id, "", alloc::format!("def h(): return {id}"), Lineage {
            origin: Origin::Seeded,
            generation: 0,
        });
        match f {
            Some(v) => c.mark_valid(v),
            None => c.mark_invalid(Failure::Timeout),
        }
        c
    }

    #[test]
    fn best_of_matches_scan() {
        let cs = [cand(0, Some(-3.0)), cand(1, None), cand(2, Some(-1.0)), cand(3, Some(-1.0))];
        assert_eq!(best_of(&cs).unwrap().id, 2);
        assert!(best_of(&cs[1..2]).is_none());
    }

    #[test]
    fn failure_clause_only_for_invalid() {
        assert!(failure_clause("worse", &cand(0, Some(1.0))).is_none());
        assert!(failure_clause("worse", &cand(0, None)).unwrap().contains("timeout"));
    }
}
