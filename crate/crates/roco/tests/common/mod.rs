#![allow(dead_code)]

use std::path::PathBuf;

use roco::worker::{WorkerCommand, WorkerPool};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn python() -> String {
    std::env::var("ROCO_TEST_PYTHON").unwrap_or_else(|_| "python3".into())
}

pub fn worker_command() -> WorkerCommand {
    WorkerCommand::new(python(), [fixture("worker.py").display().to_string()])
}

pub fn pool(size: usize) -> WorkerPool {
    WorkerPool::new(worker_command(), size).expect("python3 with numpy is needed for worker tests")
}
