//! Automated repair of MiniLang programs by multi-objective genetic
//! programming over a three-part patch genome.
//!
//! The pipeline: run the suite with coverage, rank statements by Ochiai
//! suspiciousness, drop positive tests that never reach a candidate,
//! screen covered statements into per-location ingredient lists, then
//! evolve patches with NSGA-II minimising patch size and weighted failure
//! rate. Baselines (single-objective GA, random search, deletion-only) and
//! a seeded-bug generator make up the experiment harness.

pub mod minilang;
pub mod campaign;
pub mod cli;
pub mod error;
pub mod filtering;
pub mod genome;
pub mod ingredients;
pub mod localization;
pub mod pipeline;
pub mod search;
pub mod seeder;

pub use error::{RepairError, Result};
