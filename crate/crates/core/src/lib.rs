//! Allocation-only core of the role-based automatic heuristic design pipeline.
//!
//! Everything here is pure computation: problem instances and their
//! objectives, the ACO and GLS frameworks that consume heuristic guidance,
//! exact reference solvers, the EoH population machinery and the
//! explorer/exploiter/critic/integrator collaboration protocol. Language
//! models, heuristic execution and persistence are reached only through the
//! traits in [`llm`], [`exec`] and [`engine`], so the whole loop can be
//! driven by deterministic test doubles.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod aco;
pub mod collab;
pub mod corpus;
pub mod critic;
pub mod engine;
pub mod eoh;
pub mod exact;
pub mod exec;
pub mod gls;
pub mod heuristic;
pub mod llm;
pub mod math;
pub mod matrix;
pub mod memory;
pub mod population;
pub mod problem;
pub mod prompt;
pub mod rng;
pub mod selection;

pub use heuristic::{HeuristicCandidate, Lineage, Validity};
pub use matrix::Matrix;
pub use problem::{CopInstance, ProblemKind, Solution};
