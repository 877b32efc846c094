use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid {key}: {msg}")]
    Invalid { key: String, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical failure at step {step}: {source}")]
    Numerical {
        step: usize,
        #[source]
        source: nsch_core::Error,
    },

    #[error("{0}")]
    Format(String),

    #[error("{0}")]
    Violation(String),
}

impl SimError {
    pub fn invalid(key: &str, msg: impl Into<String>) -> Self {
        SimError::Invalid {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 usage/config/io, 2 numerical, 3 check violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Numerical { .. } => 2,
            SimError::Violation(_) => 3,
            _ => 1,
        }
    }
}

pub type SimResult<T> = Result<T, SimError>;
