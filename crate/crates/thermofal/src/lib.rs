//! Falsification toolkit for a hybrid thermostat system.
//!
//! The pipeline: learn exponential surrogate models from recorded traces
//! ([`sysid`]), generate candidate usage scenarios by walking a two-state
//! Markov chain ([`scenario`]), simulate schedules against the surrogates
//! with a bang-bang controller ([`sim`]), and evolve scenarios with a
//! genetic algorithm to maximize the deviation between scheduled and
//! simulated behaviour ([`evolve`]).  On-disk formats live in [`format`].

pub mod error;
pub mod evolve;
pub mod format;
pub mod scenario;
pub mod sim;
pub mod stats;
pub mod surrogate;
pub mod sysid;

pub use error::{Error, Result};
pub use evolve::{ComparisonReport, EvolutionResult, GaConfig};
pub use scenario::{GeneratorConfig, ScenarioState, TestCase};
pub use sim::{SimConfig, Trace};
pub use surrogate::{Mode, ModelCoefficients, ModelRegistry};
