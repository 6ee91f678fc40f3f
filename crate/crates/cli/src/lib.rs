//! Pipeline commands behind the `lssal` binary: feature extraction with
//! on-disk caching, training, prediction, evaluation and a synthetic
//! dataset generator.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod synth;

pub use error::{CliError, CliResult};
pub use manifest::{Manifest, Record};
