use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failure of a CLI run. Each kind maps to its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] anderson_clock::Error),
    #[error("oracle comparison failed: {0}")]
    OracleFailed(String),
}

pub mod exit {
    pub const CONFIG: u8 = 3;
    pub const IO: u8 = 4;
    pub const SPECTRAL_EDGE: u8 = 5;
    pub const ORACLE: u8 = 6;
    pub const NUMERICAL: u8 = 7;
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        use anderson_clock::Error as E;
        match self {
            CliError::Config { .. } => exit::CONFIG,
            CliError::Io { .. } => exit::IO,
            CliError::OracleFailed(_) => exit::ORACLE,
            CliError::Core(e) => match e {
                E::InvalidParameter { .. } | E::LengthMismatch { .. } | E::SiteOutOfRange { .. } => exit::CONFIG,
                E::SpectralEdge { .. } => exit::SPECTRAL_EDGE,
                E::OracleMismatch(_) => exit::ORACLE,
                _ => exit::NUMERICAL,
            },
        }
    }

    fn kind_and_field(&self) -> (&'static str, String) {
        use anderson_clock::Error as E;
        match self {
            CliError::Config { field, .. } => ("config", field.clone()),
            CliError::Io { path, .. } => ("io", path.display().to_string()),
            CliError::OracleFailed(_) => ("oracle", "-".into()),
            CliError::Core(e) => match e {
                E::InvalidParameter { field, .. } => ("config", (*field).to_string()),
                E::SpectralEdge { .. } => ("spectral-edge", "window_k".into()),
                E::OracleMismatch(_) => ("oracle", "-".into()),
                _ => ("numerical", "-".into()),
            },
        }
    }

    /// Single machine-parseable line: `error: kind=<kind> field=<field> message=<text>`.
    pub fn line(&self) -> String {
        let (kind, field) = self.kind_and_field();
        let message = self.to_string().replace('\n', " ");
        format!("error: kind={kind} field={field} message={message}")
    }
}
