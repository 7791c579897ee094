use std::fs;
use std::process::Command;
use std::time::Instant;

use roco::instance_io::read_instances;

fn roco() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_roco"));
    c.env("RUST_LOG", "warn");
    c
}

#[test]
fn config_errors_exit_with_code_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "problem = \"tsp\"\n[engine]\npopulation_size = -1\n").unwrap();
    let out = roco().args(["evolve", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("run")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("engine.population_size"), "{err}");

    let out = roco().args(["evolve", "--config"]).arg(dir.path().join("missing.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mock_evolve_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "problem = \"tsp\"\n[training]\ninstances = 2\nsize = 10\n[solver]\nants = 10\niterations = 10\n[engine]\ngenerations = 2\n",
    )
    .unwrap();
    let run = dir.path().join("run");
    let start = Instant::now();
    let out = roco().args(["evolve", "--config"]).arg(&cfg).arg("--out").arg(&run).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(start.elapsed().as_secs() < 60);
    assert!(String::from_utf8_lossy(&out.stdout).contains("best fitness"));
    for name in ["config.toml", "snapshots.jsonl", "transcript.jsonl", "curve.csv", "results.csv"] {
        assert!(run.join(name).is_file(), "{name}");
    }
    let curve = fs::read_to_string(run.join("curve.csv")).unwrap();
    assert_eq!(curve.lines().next(), Some("evaluation,best_fitness,fitness,candidate"));

    let again = dir.path().join("again");
    let out = roco()
        .args(["evolve", "--backend", "replay", "--config"])
        .arg(&cfg)
        .arg("--transcript")
        .arg(run.join("transcript.jsonl"))
        .arg("--out")
        .arg(&again)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(run.join("snapshots.jsonl")).unwrap(),
        fs::read(again.join("snapshots.jsonl")).unwrap()
    );
}

#[test]
fn generate_and_bench_commands() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("mkp.jsonl");
    let out = roco()
        .args(["generate", "--problem", "mkp", "--size", "12", "--instances", "3", "--seed", "9", "--out"])
        .arg(&file)
        .output()
        .unwrap();
    assert!(out.status.success());
    let insts = read_instances(&file).unwrap();
    assert_eq!(insts.len(), 3);
    assert!(insts.iter().all(|i| i.size() == 12 && i.seed() == 9));

    let out = roco()
        .args(["bench-corpus", "--problem", "tsp", "--tier", "vanilla", "--size", "10,12", "--instances", "2"])
        .args(["--iterations", "5", "--ants", "5"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "problem,setting,heuristic,size,instances,instance_seed,solver_seed,mean_objective");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("tsp,white,tsp-white-vanilla,10,2,1234,7,"));

    let out = roco().args(["gls-bench", "--size", "8", "--instances", "2"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("8,2,1234,"));

    let out = roco().args(["bench-corpus", "--problem", "knapsack", "--size", "10"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
