use std::fs;

use roco::config::RunConfig;
use roco::gateway::read_transcript;
use roco::rundir::{CURVE_FILE, SNAPSHOTS_FILE, TRANSCRIPT_FILE};
use roco::run;
use roco_core::engine::Stop;
use roco_core::llm::LlmError;

const BASE: &str = r#"problem = "cvrp"

[training]
instances = 2
size = 12

[solver]
ants = 5
iterations = 5

[engine]
generations = 2
population_size = 4
initial_size = 6
eoh_repeats = 1
seed = 3

[executor]
threads = 1
"#;

fn evolve(text: &str, out: &std::path::Path) -> run::EvolveReport {
    let cfg = RunConfig::parse(text).unwrap();
    run::evolve(&cfg, text, out).unwrap()
}

fn replay_config(base: &str, transcript: &std::path::Path) -> String {
    format!("{base}\n[backend]\nkind = \"replay\"\ntranscript = {:?}\n", transcript.display().to_string())
}

#[test]
fn replay_reproduces_the_recorded_run() {
    let dir = tempfile::tempdir().unwrap();
    let (live, again) = (dir.path().join("mock"), dir.path().join("replay"));
    let recorded = evolve(BASE, &live);
    let copy = dir.path().join("recorded.jsonl");
    fs::copy(live.join(TRANSCRIPT_FILE), &copy).unwrap();
    let replayed = evolve(&replay_config(BASE, &copy), &again);

    assert_eq!(recorded.summary.generations_completed, 2);
    assert_eq!(replayed.summary.stop, None);
    assert_eq!(recorded.summary.population, replayed.summary.population);
    for name in [SNAPSHOTS_FILE, CURVE_FILE, TRANSCRIPT_FILE] {
        assert_eq!(fs::read(live.join(name)).unwrap(), fs::read(again.join(name)).unwrap(), "{name}");
    }
    let records = read_transcript(&copy).unwrap();
    assert_eq!(records.len(), recorded.heuristic_calls + recorded.auxiliary_calls);
    assert!(records.iter().enumerate().all(|(i, r)| r.seq == i as u64));
}

#[test]
fn replay_rejects_a_diverging_run() {
    let dir = tempfile::tempdir().unwrap();
    let live = dir.path().join("mock");
    evolve(BASE, &live);
    let copy = dir.path().join("recorded.jsonl");
    fs::copy(live.join(TRANSCRIPT_FILE), &copy).unwrap();
    let changed = BASE.replace("size = 12", "size = 13");
    let report = evolve(&replay_config(&changed, &copy), &dir.path().join("other"));
    assert!(matches!(report.summary.stop, Some(Stop::Llm(LlmError::Replay(_)))), "{:?}", report.summary.stop);
}
