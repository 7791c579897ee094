//! Command-line interface.

use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use roco_core::corpus::{self, NativeRunner, Tier};
use roco_core::heuristic::Setting;
use roco_core::problem::{generate_instance, GeneratorConfig, ProblemKind};

use crate::bench::{self, CorpusBench, CorpusRow, DEFAULT_TEST_INSTANCES, DEFAULT_TEST_SEED};
use crate::config::{BackendKind, ConfigError, RunConfig};
use crate::instance_io::write_instances;
use crate::parallel;
use crate::run::{self, RunError};

/// Exit status for configuration errors.
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "roco", version, about = "Evolve and benchmark heuristics for combinatorial optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TierArg {
    Best,
    Vanilla,
}

impl From<TierArg> for Tier {
    fn from(t: TierArg) -> Tier {
        match t {
            TierArg::Best => Tier::Best,
            TierArg::Vanilla => Tier::Vanilla,
        }
    }
}

fn parse_problem(s: &str) -> Result<ProblemKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_setting(s: &str) -> Result<Setting, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an evolution from a TOML config.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `backend.kind`.
        #[arg(long, value_enum)]
        backend: Option<BackendKind>,
        /// Overrides `backend.transcript`.
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[arg(long, default_value = "run")]
        out: PathBuf,
    },
    /// Mean objective of a corpus heuristic on regenerated test sets.
    BenchCorpus {
        #[arg(long, value_parser = parse_problem)]
        problem: ProblemKind,
        #[arg(long, value_parser = parse_setting, default_value = "white")]
        setting: Setting,
        #[arg(long, value_enum, default_value = "best")]
        tier: TierArg,
        #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
        size: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_TEST_INSTANCES)]
        instances: usize,
        /// Instance-generation seeds; one row per seed and size.
        #[arg(long, num_args = 1.., value_delimiter = ',', default_value = "1234")]
        seeds: Vec<u64>,
        #[arg(long)]
        ants: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimality gap of guided local search against exact optima.
    GlsBench {
        #[arg(long, num_args = 1.., value_delimiter = ',', default_value = "20")]
        size: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_TEST_INSTANCES)]
        instances: usize,
        #[arg(long, default_value_t = DEFAULT_TEST_SEED)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write generated instances as JSON lines.
    Generate {
        #[arg(long, value_parser = parse_problem)]
        problem: ProblemKind,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        instances: usize,
        #[arg(long, default_value_t = DEFAULT_TEST_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the built-in heuristic corpus.
    Corpus,
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Other(String),
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(c) => CliError::Config(c),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<bench::BenchError> for CliError {
    fn from(e: bench::BenchError) -> Self {
        CliError::Other(e.to_string())
    }
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(CliError::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::FAILURE
        }
    }
}

fn csv_sink(out: &Option<PathBuf>) -> io::Result<Box<dyn io::Write>> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(io::stdout()),
    })
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Evolve {
            config,
            backend,
            transcript,
            out,
        } => evolve(&config, backend, transcript, &out),
        Command::BenchCorpus {
            problem,
            setting,
            tier,
            size,
            instances,
            seeds,
            ants,
            iterations,
            threads,
            out,
        } => {
            let mut b = CorpusBench::new(problem, setting, tier.into());
            b.instances = instances;
            b.ants = ants;
            b.iterations = iterations;
            b.threads = threads.unwrap_or_else(parallel::default_threads);
            let name = b.entry()?.name.to_string();
            let mut rows = Vec::new();
            for &seed in &seeds {
                b.instance_seed = seed;
                for &n in &size {
                    let objs = b.run(n, &mut NativeRunner::new())?;
                    let mean = bench::mean(&objs);
                    log::info!("{name} n={n} seed={seed}: mean {mean:.6}");
                    rows.push(CorpusRow {
                        problem,
                        setting,
                        heuristic: name.clone(),
                        size: n,
                        instances,
                        instance_seed: seed,
                        solver_seed: b.solver_seed,
                        mean_objective: mean,
                    });
                }
            }
            bench::write_corpus_csv(csv_sink(&out)?, &rows)?;
            Ok(())
        }
        Command::GlsBench {
            size,
            instances,
            seed,
            threads,
            out,
        } => {
            let threads = threads.unwrap_or_else(parallel::default_threads);
            let mut rows = Vec::new();
            for n in size {
                let row = bench::gls_gap(n, instances, seed, threads, &mut NativeRunner::new())?;
                log::info!("n={n}: gap {:.6}%", row.gap_percent);
                rows.push(row);
            }
            bench::write_gap_csv(csv_sink(&out)?, seed, &rows)?;
            Ok(())
        }
        Command::Generate {
            problem,
            size,
            instances,
            seed,
            out,
        } => {
            let insts = (0..instances as u64)
                .map(|i| generate_instance(problem, size, seed, i, &GeneratorConfig::default()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Other(e.to_string()))?;
            write_instances(&out, &insts)?;
            Ok(())
        }
        Command::Corpus => {
            for e in corpus::catalogue() {
                println!("{}\t{}\t{}\t{:?}\t{:?}", e.name, e.kind, e.setting.name(), e.framework, e.tier);
            }
            Ok(())
        }
    }
}

fn evolve(config: &Path, backend: Option<BackendKind>, transcript: Option<PathBuf>, out: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config).map_err(|e| CliError::Config(ConfigError::Io(config.to_path_buf(), e)))?;
    let mut cfg = RunConfig::parse(&text).map_err(CliError::Config)?;
    if let Some(kind) = backend {
        cfg.backend.kind = kind;
    }
    if transcript.is_some() {
        cfg.backend.transcript = transcript;
    }
    cfg.validate().map_err(CliError::Config)?;
    let report = run::evolve(&cfg, &text, out)?;
    let s = &report.summary;
    match s.population.best() {
        Some(best) => println!(
            "best fitness {:.6} after {} generations, {} evaluations ({})",
            best.fitness().unwrap_or(f64::NAN),
            s.generations_completed,
            s.evaluations,
            out.display()
        ),
        None => println!("no valid heuristic; results in {}", out.display()),
    }
    if let Some(stop) = &s.stop {
        log::info!("stopped early: {stop}");
    }
    Ok(())
}
