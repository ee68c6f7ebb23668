//! Command-line pipeline: `synth` generates labelled benchmark data,
//! `evolve` searches for a feature partition, `train-eval` trains and
//! scores the final ensemble, `evaluate` recomputes metrics from an
//! existing score dump.

pub mod commands;
pub mod config;
pub mod pipeline;
pub mod report;

pub use commands::{cmd_evaluate, cmd_evolve, cmd_synth, cmd_train_eval, load_config_with_overrides};
pub use config::{CliError, RunConfig};
