use std::path::PathBuf;

use fosiqr_core::{AnalysisError, FractionalError, ScenarioError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown configuration key '{0}'")]
    UnknownKey(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("solver: {0}")]
    Solver(#[from] FractionalError),
    #[error("analysis: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("scenario: {0}")]
    Scenario(ScenarioError),
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Solver(e) => CliError::Solver(e),
            ScenarioError::Model(e) => CliError::Validation(e.to_string()),
            other => CliError::Scenario(other),
        }
    }
}

impl CliError {
    /// Process exit status; each error class maps to its own code.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse { .. } => 3,
            CliError::UnknownKey(_) | CliError::Validation(_) => 4,
            CliError::Io { .. } => 5,
            CliError::Solver(_) => 6,
            CliError::Analysis(_) => 7,
            CliError::Scenario(_) => 8,
        }
    }

    /// Single-line diagnostic, prefixed `error:`.
    pub fn diagnostic(&self) -> String {
        let text = self.to_string().replace(['\n', '\r'], " ");
        format!("error: {text}")
    }
}
