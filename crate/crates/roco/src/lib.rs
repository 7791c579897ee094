//! Evolution runs, benchmarks and process-level plumbing on top of `roco-core`.

pub mod bench;
pub mod cli;
pub mod config;
pub mod evaluator;
pub mod gateway;
pub mod instance_io;
pub mod parallel;
pub mod protocol;
pub mod run;
pub mod rundir;
pub mod worker;
