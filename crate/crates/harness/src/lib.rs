//! Experiment harness for the block-adaptive particle filter: configuration
//! files, replicated runs with derived seeds, aggregation, and CSV output.

pub mod catalog;
pub mod config;
pub mod experiment;
pub mod output;
pub mod seeds;

use std::path::PathBuf;

pub use blockpf::simulate::simulate_data;
pub use config::{ExperimentConfig, Metric, Mode, ModelKind};
pub use experiment::{run_replicates, run_table, Row, Table};
pub use seeds::{replicate_seed, replicate_seeds};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` given twice")]
    DuplicateKey(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    Invalid {
        key: &'static str,
        value: String,
        reason: &'static str,
    },
}

impl ConfigError {
    pub(crate) fn invalid(key: &'static str, value: &str, reason: &'static str) -> Self {
        ConfigError::Invalid {
            key,
            value: value.to_string(),
            reason,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Model(#[from] blockpf::Error),
    #[error("no experiment or file named `{0}`")]
    NotFound(String),
}
