use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Errors of the command-line layer. Each maps to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid value for --{flag}: {reason}")]
    Invalid { flag: String, reason: String },
    #[error("{0}")]
    Model(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
}

impl CliError {
    /// 1 for usage and validation errors, 2 for file errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Invalid { .. } | CliError::Model(_) => 1,
            CliError::Io { .. } | CliError::Format { .. } => 2,
        }
    }

    pub fn invalid(flag: &str, reason: impl Into<String>) -> Self {
        CliError::Invalid {
            flag: flag.to_string(),
            reason: reason.into(),
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, message: impl Into<String>) -> Self {
        CliError::Format {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

/// Command-line flag that sets a core parameter, if any.
fn flag_for(name: &str) -> Option<&'static str> {
    Some(match name {
        "J" => "J",
        "lambda" => "lambda",
        "d" | "max_draws" => "d",
        "alpha" => "alpha",
        "min-j0" => "min-j0",
        "pilot" => "pilot",
        "hidden" | "widths" => "hidden",
        "delta" => "activation",
        "n" => "n",
        "nv" => "nv",
        "q" => "q",
        "runs" => "runs",
        "h" => "h",
        "trim" | "fraction" => "trim",
        "val-window" => "val-window",
        "side" => "side",
        _ => return None,
    })
}

impl From<randnet_core::Error> for CliError {
    fn from(e: randnet_core::Error) -> Self {
        if let randnet_core::Error::Parameter { name, reason } = &e {
            if let Some(flag) = flag_for(name) {
                return CliError::invalid(flag, reason.clone());
            }
        }
        CliError::Model(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
