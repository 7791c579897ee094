use proptest::prelude::*;

use roco_core::aco::{run_aco_observed, transition_probabilities, vanilla_heuristic, AcoParams};
use roco_core::corpus::NativeRunner;
use roco_core::engine::{self, EngineConfig, NullObserver};
use roco_core::exec::{default_timeout_s, fitness_of, LocalEvaluator, SolverConfig, TrainingSet};
use roco_core::gls::{nearest_neighbor_tour, penalize, run_gls, GlsParams, PenaltyState};
use roco_core::heuristic::{Failure, Framework, HeuristicCandidate, HeuristicSignature, Lineage, Origin, Setting};
use roco_core::llm::{ChatRequest, LanguageModel, LlmError, MockModel, Role, DEFAULT_TEMPERATURE};
use roco_core::population::Population;
use roco_core::problem::{feasible, generate_instance, objective, Direction, GeneratorConfig, Payload, ProblemKind};
use roco_core::selection::top_n;

fn kind() -> impl Strategy<Value = ProblemKind> {
    prop::sample::select(ProblemKind::ALL.to_vec())
}

fn size_for(kind: ProblemKind, n: usize) -> usize {
    if kind == ProblemKind::Op {
        50
    } else {
        n
    }
}

fn candidate(id: u64, fitness: Option<f64>) -> HeuristicCandidate {
    let mut c = HeuristicCandidate::new(id, "", format!("def h(x):\n    return x + {id}\n"), Lineage {
        origin: Origin::Seeded,
        generation: 0,
    });
    match fitness {
        Some(f) => c.mark_valid(f),
        None => c.mark_invalid(Failure::Exception("x".into())),
    }
    c
}

fn pool() -> impl Strategy<Value = Vec<HeuristicCandidate>> {
    prop::collection::vec(prop::option::weighted(0.8, -20i32..0), 0..40).prop_map(|fs| {
        fs.into_iter()
            .enumerate()
            .map(|(i, f)| candidate(i as u64, f.map(|v| f64::from(v) / 4.0)))
            .collect()
    })
}

fn permutation(tour: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    tour.len() == n && tour.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generation_is_pure(kind in kind(), n in 5usize..30, seed in any::<u64>(), index in 0u64..100) {
        let cfg = GeneratorConfig::default();
        let n = size_for(kind, n);
        let a = generate_instance(kind, n, seed, index, &cfg).unwrap();
        let b = generate_instance(kind, n, seed, index, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn mkp_items_fit_alone(n in 5usize..60, seed in any::<u64>()) {
        let inst = generate_instance(ProblemKind::Mkp, n, seed, 0, &GeneratorConfig::default()).unwrap();
        let Payload::Mkp { weights, capacities, .. } = inst.payload() else { unreachable!() };
        for (k, cap) in capacities.iter().enumerate() {
            let heaviest = weights.row(k).iter().copied().fold(0.0, f64::max);
            prop_assert!(*cap > heaviest);
        }
    }

    #[test]
    fn aco_runs_stay_finite_and_monotone(kind in kind(), n in 5usize..16, seed in any::<u64>()) {
        let inst = generate_instance(kind, size_for(kind, n), seed, 0, &GeneratorConfig::default()).unwrap();
        let params = AcoParams { n_ants: 6, n_iterations: 8, seed, ..AcoParams::default() };
        let mut tau_ok = true;
        let run = run_aco_observed(&inst, &vanilla_heuristic(&inst), &params, |_, tau| {
            tau_ok &= tau.values().iter().all(|t| t.is_finite() && *t > 0.0);
        })
        .unwrap();
        prop_assert!(tau_ok);
        let dir = kind.direction();
        for w in run.trajectory.windows(2) {
            prop_assert!(!dir.better(w[0], w[1]));
        }
        prop_assert!(feasible(&inst, &run.best).0);
        let obj = objective(&inst, &run.best).unwrap();
        prop_assert!(obj.is_finite());
        prop_assert_eq!(obj, run.best_objective);
    }

    #[test]
    fn transition_probabilities_sum_to_one(w in prop::collection::vec(0.0f64..1e6, 1..60)) {
        let p = transition_probabilities(&w);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn gls_tours_are_permutations(n in 4usize..25, seed in any::<u64>(), iters in 0usize..30) {
        let inst = generate_instance(ProblemKind::Tsp, n, seed, 0, &GeneratorConfig::default()).unwrap();
        let d = inst.distances().unwrap();
        let params = GlsParams { n_iterations: iters, perturbation_moves: 5, lambda: 0.1, seed };
        let run = run_gls(d, d, &params, None);
        prop_assert!(permutation(&run.tour, n));
        for w in run.trajectory.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        if iters == 0 {
            prop_assert_eq!(run.tour, nearest_neighbor_tour(d));
        }
    }

    #[test]
    fn penalties_only_grow(n in 4usize..15, seed in any::<u64>(), steps in 1usize..40) {
        let inst = generate_instance(ProblemKind::Tsp, n, seed, 0, &GeneratorConfig::default()).unwrap();
        let d = inst.distances().unwrap();
        let tour = nearest_neighbor_tour(d);
        let mut pen = PenaltyState::new(n);
        for step in 0..steps {
            let before: Vec<u32> = (0..n * n).map(|k| pen.get(k / n, k % n)).collect();
            penalize(&tour, d, &mut pen);
            let after: Vec<u32> = (0..n * n).map(|k| pen.get(k / n, k % n)).collect();
            prop_assert!(before.iter().zip(&after).all(|(a, b)| b >= a));
            prop_assert_eq!(pen.total(), step as u64 + 1);
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(pen.get(i, j), pen.get(j, i));
                }
            }
        }
    }

    #[test]
    fn orientation_preserves_the_ranking(raw in prop::collection::vec(prop::collection::vec(0.1f64..100.0, 3), 2..12)) {
        for kind in ProblemKind::ALL {
            let fit: Vec<f64> = raw.iter().map(|o| fitness_of(kind, o)).collect();
            let means: Vec<f64> = raw.iter().map(|o| o.iter().sum::<f64>() / o.len() as f64).collect();
            let best_fit = (0..fit.len()).max_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(b.cmp(&a))).unwrap();
            let best_raw = match kind.direction() {
                Direction::Minimize => (0..means.len()).min_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b))).unwrap(),
                Direction::Maximize => (0..means.len()).max_by(|&a, &b| means[a].total_cmp(&means[b]).then(b.cmp(&a))).unwrap(),
            };
            prop_assert!((means[best_fit] - means[best_raw]).abs() < 1e-9);
        }
    }

    #[test]
    fn top_n_cannot_be_improved_by_a_swap(cands in pool(), keep in 0usize..20) {
        let chosen = top_n(cands.clone(), keep);
        let ids: Vec<u64> = chosen.iter().map(|c| c.id).collect();
        prop_assert!(chosen.iter().all(HeuristicCandidate::is_valid));
        let valid = cands.iter().filter(|c| c.is_valid()).count();
        prop_assert_eq!(chosen.len(), keep.min(valid));
        let worst_in = chosen.iter().filter_map(|c| c.fitness()).fold(f64::INFINITY, f64::min);
        for out in cands.iter().filter(|c| c.is_valid() && !ids.contains(&c.id)) {
            prop_assert!(out.fitness().unwrap() <= worst_in);
        }
    }

    #[test]
    fn populations_stay_sorted_and_bounded(a in pool(), b in pool(), cap in 1usize..12, keep in any::<bool>()) {
        let p = Population::select(a, cap);
        prop_assert!(p.invariants_hold());
        let shifted: Vec<HeuristicCandidate> = b
            .into_iter()
            .map(|mut c| {
                c.id += 1000;
                c
            })
            .collect();
        let q = p.merge(shifted, keep);
        prop_assert!(q.invariants_hold());
        prop_assert!(q.len() <= cap);
        prop_assert!(q.members().iter().all(HeuristicCandidate::is_valid));
        prop_assert!(q.members().windows(2).all(|w| w[0].fitness() >= w[1].fitness()));
    }
}

/// Wraps a model and checks the role-to-temperature mapping of every request.
struct TemperatureAudit<M> {
    inner: M,
    requests: usize,
    bad: Vec<String>,
}

impl<M: LanguageModel> LanguageModel for TemperatureAudit<M> {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, LlmError> {
        self.requests += 1;
        let want = match request.role {
            Some(Role::Explorer) => 1.3,
            Some(Role::Exploiter) => 0.8,
            Some(Role::Critic) | Some(Role::Integrator) => 1.0,
            None => DEFAULT_TEMPERATURE,
        };
        if request.temperature != want {
            self.bad.push(format!("{} {:?} at {}", request.template_id, request.role, request.temperature));
        }
        self.inner.complete(request)
    }
}

fn small_training(kind: ProblemKind) -> (TrainingSet, SolverConfig) {
    let signature = HeuristicSignature::new(kind, Setting::WhiteBox, Framework::Aco).unwrap();
    let instances = (0..2).map(|i| generate_instance(kind, 12, 2, i, &GeneratorConfig::default()).unwrap()).collect();
    let training = TrainingSet {
        instances,
        signature,
        timeout_s: default_timeout_s(kind),
    };
    let solver = SolverConfig::Aco(AcoParams {
        n_ants: 5,
        n_iterations: 5,
        ..AcoParams::default()
    });
    (training, solver)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn engine_runs_respect_roles_and_memory(seed in any::<u64>(), generations in 1usize..3, kind in prop::sample::select(vec![ProblemKind::Tsp, ProblemKind::Mkp])) {
        let (training, solver) = small_training(kind);
        let signature = training.signature.clone();
        let mut eval = LocalEvaluator { runner: NativeRunner::new(), training, solver };
        let mut llm = TemperatureAudit { inner: MockModel::for_signature(&signature, seed), requests: 0, bad: Vec::new() };
        let config = EngineConfig {
            population_size: 4,
            initial_size: 6,
            generations,
            eoh_repeats: Some(1),
            seed,
            ..EngineConfig::default()
        };
        let s = engine::run(config, &signature, &mut llm, &mut eval, &mut NullObserver).unwrap();
        prop_assert!(llm.bad.is_empty(), "{:?}", llm.bad);
        prop_assert!(llm.requests > 0);
        prop_assert_eq!(s.generations_completed, generations);
        prop_assert!(s.population.invariants_hold());
        for role in [Role::Explorer, Role::Exploiter] {
            prop_assert_eq!(s.memory.get(role).unwrap().history.len(), generations);
            prop_assert!(s.memory.get(role).unwrap().short_term.is_empty());
        }
        let members: Vec<u64> = s.population.members().iter().map(|c| c.id).collect();
        for c in &s.candidates {
            if !c.is_valid() {
                prop_assert!(!members.contains(&c.id));
            }
        }
    }
}
