use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("`{key}`: {reason}")]
    Inconsistent { key: String, reason: String },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ConfigError {
    pub(crate) fn invalid(key: &str, value: impl ToString, reason: impl ToString) -> Self {
        ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        }
    }

    pub(crate) fn inconsistent(key: &str, reason: impl ToString) -> Self {
        ConfigError::Inconsistent {
            key: key.to_string(),
            reason: reason.to_string(),
        }
    }

    /// The config key the error refers to, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey(k) => Some(k),
            ConfigError::InvalidValue { key, .. } | ConfigError::Inconsistent { key, .. } => {
                Some(key)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace parse error at byte {offset}: {msg}")]
    Parse { offset: u64, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error)]
pub enum SimError {
    /// A simulator invariant was broken (illegal command for the bank state,
    /// scheduler livelock). Always a bug.
    #[error("simulation contract violated: {0}")]
    Contract(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Io(#[from] io::Error),
}
