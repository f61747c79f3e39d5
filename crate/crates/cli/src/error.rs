use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Resource(_) => 4,
            CliError::Internal(_) => 1,
        })
    }
}

impl From<infoproc_core::Error> for CliError {
    fn from(e: infoproc_core::Error) -> Self {
        use infoproc_core::Error as E;
        let msg = e.to_string();
        match e {
            E::Domain(_) => CliError::Usage(msg),
            E::Format(_) | E::Io(_) => CliError::Input(msg),
            E::Resource(_) => CliError::Resource(msg),
            E::Consistency(_) => CliError::Internal(msg),
        }
    }
}

impl From<infoproc_series::Error> for CliError {
    fn from(e: infoproc_series::Error) -> Self {
        use infoproc_series::Error as E;
        let msg = e.to_string();
        match e {
            E::Domain(_) => CliError::Usage(msg),
            E::Format(_) | E::Io(_) | E::Degenerate(_) => CliError::Input(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(format!("JSON serialization: {e}"))
    }
}
