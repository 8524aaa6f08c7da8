use std::path::Path;

/// Failures surfaced as process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Scenario, sweep, override or CSV content problems (exit 2).
    #[error("{0}")]
    Config(String),
    /// Filesystem problems (exit 3).
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn config(msg: impl ToString) -> Self {
        CliError::Config(msg.to_string())
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<gsdma_core::scenario_file::ScenarioError> for CliError {
    fn from(e: gsdma_core::scenario_file::ScenarioError) -> Self {
        use gsdma_core::scenario_file::ScenarioError;
        match e {
            ScenarioError::Io { path, source } => CliError::io(&path, source),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<gsdma_core::scenario_file::ParseError> for CliError {
    fn from(e: gsdma_core::scenario_file::ParseError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<gsdma_core::config::ValidationError> for CliError {
    fn from(e: gsdma_core::config::ValidationError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<gsdma_core::channel::TopologyError> for CliError {
    fn from(e: gsdma_core::channel::TopologyError) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
