//! Batch driver for `fractal-she`: TOML experiment configs, the six
//! experiment kinds, and CSV/JSON reports.

pub mod config;
pub mod experiment;
pub mod report;

pub use config::{Bc, ExperimentConfig, ExperimentKind, StructureSpec};
pub use experiment::run_experiment;
pub use report::{emit_report, CriterionResult, KsEntry, ReportFormat, RunReport, SCHEMA_VERSION};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("cannot read config {path}: {reason}")]
    ConfigFile { path: PathBuf, reason: String },
    #[error("unknown preset {0:?} (expected interval(M) or gasket(n))")]
    UnknownPreset(String),
    #[error("level {level} is out of range (largest allowed for this structure: {max})")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("truncation {requested} is out of range ({available} eigenpairs available)")]
    TruncationOutOfRange { requested: usize, available: usize },
    #[error("output directory {path} is not writable: {reason}")]
    OutputDir { path: PathBuf, reason: String },
    #[error("serialization failed: {0}")]
    Serialize(String),
    #[error(transparent)]
    Numerical(#[from] fractal_she::Error),
}

impl CliError {
    /// Errors detectable before any computation starts.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            CliError::Config(_)
                | CliError::ConfigFile { .. }
                | CliError::UnknownPreset(_)
                | CliError::LevelOutOfRange { .. }
                | CliError::TruncationOutOfRange { .. }
        )
    }
}
