//! Experiment runner for the `anyonlab` studies.
//!
//! Every subcommand is normalized into an [`config::ExperimentConfig`],
//! hashed, dispatched to the library and persisted as `results.csv`,
//! `manifest.json`, `config.toml` and, where a figure exists, `plots/*.svg`.

pub mod cli;
pub mod config;
pub mod manifest;
pub mod plots;
pub mod studies;

pub use cli::main_with_args;
