//! Run directory layout: `config.toml`, `snapshots.jsonl`, `transcript.jsonl`,
//! `curve.csv` and `results.csv`.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use roco_core::engine::{CurvePoint, RunObserver};
use roco_core::heuristic::{HeuristicCandidate, Lineage};
use roco_core::population::Population;
use serde::{Deserialize, Serialize};

pub const CONFIG_FILE: &str = "config.toml";
pub const SNAPSHOTS_FILE: &str = "snapshots.jsonl";
pub const TRANSCRIPT_FILE: &str = "transcript.jsonl";
pub const CURVE_FILE: &str = "curve.csv";
pub const RESULTS_FILE: &str = "results.csv";

/// Six-decimal fixed point; empty for a missing value.
pub fn fixed6(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// One population member in `snapshots.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub generation: usize,
    pub rank: usize,
    pub id: u64,
    pub description: String,
    pub source: String,
    pub fitness: f64,
    pub lineage: Lineage,
}

impl SnapshotRecord {
    pub fn new(generation: usize, rank: usize, c: &HeuristicCandidate) -> Self {
        Self {
            generation,
            rank,
            id: c.id,
            description: c.description.clone(),
            source: c.source.clone(),
            fitness: c.fitness().expect("population members are scored"),
            lineage: c.lineage.clone(),
        }
    }
}

pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path, config_text: &str) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        fs::write(root.join(CONFIG_FILE), config_text)?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn observer(&self) -> io::Result<RunWriter> {
        let mut curve = BufWriter::new(File::create(self.path(CURVE_FILE))?);
        writeln!(curve, "evaluation,best_fitness,fitness,candidate")?;
        curve.flush()?;
        Ok(RunWriter {
            snapshots: BufWriter::new(File::create(self.path(SNAPSHOTS_FILE))?),
            curve,
            error: None,
        })
    }

    pub fn write_results(&self, population: &Population) -> io::Result<()> {
        let mut w = csv::Writer::from_path(self.path(RESULTS_FILE))?;
        w.write_record(["rank", "id", "origin", "generation", "fitness", "objective"])?;
        for (rank, c) in population.members().iter().enumerate() {
            w.write_record([
                rank.to_string(),
                c.id.to_string(),
                c.lineage.origin.to_string(),
                c.lineage.generation.to_string(),
                fixed6(c.fitness()),
                fixed6(c.prompt_objective()),
            ])?;
        }
        w.flush()
    }
}

/// Streams snapshots and the evaluation curve as the run progresses.
pub struct RunWriter {
    snapshots: BufWriter<File>,
    curve: BufWriter<File>,
    error: Option<io::Error>,
}

impl RunWriter {
    fn keep(&mut self, r: io::Result<()>) {
        if let Err(e) = r {
            log::error!("run output write failed: {e}");
            self.error.get_or_insert(e);
        }
    }

    /// First write error seen, if any.
    pub fn finish(mut self) -> io::Result<()> {
        let r = self.snapshots.flush().and_then(|()| self.curve.flush());
        match self.error.take() {
            Some(e) => Err(e),
            None => r,
        }
    }
}

impl RunObserver for RunWriter {
    fn on_evaluation(&mut self, point: &CurvePoint, _candidate: &HeuristicCandidate) {
        let line = format!(
            "{},{},{},{}",
            point.evaluation,
            fixed6(point.best_fitness),
            fixed6(point.fitness),
            point.candidate
        );
        let r = writeln!(self.curve, "{line}").and_then(|()| self.curve.flush());
        self.keep(r);
    }

    fn on_generation(&mut self, generation: usize, population: &Population) {
        let mut r = Ok(());
        for (rank, c) in population.members().iter().enumerate() {
            let rec = SnapshotRecord::new(generation, rank, c);
            let line = serde_json::to_string(&rec).expect("snapshots serialize");
            r = r.and_then(|()| writeln!(self.snapshots, "{line}"));
        }
        let r = r.and_then(|()| self.snapshots.flush());
        self.keep(r);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_format() {
        assert_eq!(fixed6(Some(-6.0641234567)), "-6.064123");
        assert_eq!(fixed6(Some(202.0)), "202.000000");
        assert_eq!(fixed6(None), "");
    }
}
