//! Instance files: one JSON record per line.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use roco_core::problem::{CopInstance, Payload};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub seed: u64,
    pub index: u64,
    pub payload: Payload,
}

impl From<&CopInstance> for InstanceRecord {
    fn from(inst: &CopInstance) -> Self {
        Self {
            seed: inst.seed(),
            index: inst.index(),
            payload: inst.payload().clone(),
        }
    }
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

pub fn write_instances(path: &Path, instances: &[CopInstance]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for inst in instances {
        let line = serde_json::to_string(&InstanceRecord::from(inst)).map_err(|e| invalid(e.to_string()))?;
        writeln!(w, "{line}")?;
    }
    w.flush()
}

pub fn read_instances(path: &Path) -> io::Result<Vec<CopInstance>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: InstanceRecord =
            serde_json::from_str(&line).map_err(|e| invalid(format!("{}:{}: {e}", path.display(), i + 1)))?;
        let inst = CopInstance::new(rec.payload, rec.seed, rec.index)
            .map_err(|e| invalid(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(inst);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use roco_core::problem::{generate_instance, GeneratorConfig, ProblemKind};

    #[test]
    fn round_trip_every_kind() {
        let dir = tempfile::tempdir().unwrap();
        for kind in [ProblemKind::Tsp, ProblemKind::Cvrp, ProblemKind::Op, ProblemKind::Mkp, ProblemKind::Bpp] {
            let size = if kind == ProblemKind::Op { 50 } else { 12 };
            let insts: Vec<CopInstance> = (0..3)
                .map(|i| generate_instance(kind, size, 4, i, &GeneratorConfig::default()).unwrap())
                .collect();
            let path = dir.path().join(format!("{kind}.jsonl"));
            write_instances(&path, &insts).unwrap();
            assert_eq!(read_instances(&path).unwrap(), insts);
        }
    }
}
