//! Reproducible experiment harness: configuration presets, runners, and
//! deterministic CSV/JSON emission.

pub mod config;
pub mod emit;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind};
pub use emit::{emit, state_from_json, state_to_json, EvolutionResult, Manifest};
pub use runner::{run, run_fig3, run_transport, run_wavepacket, train_or_load};
