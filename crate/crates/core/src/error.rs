use thiserror::Error;

/// Errors raised by every stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {index} out of range for graph with {n} vertices")]
    InvalidVertex { index: usize, n: usize },

    #[error("{what} of size {size} exceeds the limit of {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("matrix dimension {0} is odd; the hafnian needs an even dimension")]
    OddDimension(usize),

    #[error("encoding infeasible: eigenvalue {eigenvalue} of B is outside [0, 1)")]
    Encoding { eigenvalue: f64 },

    #[error("target of {target} mean clicks unreachable; at most {max_achievable} below the spectral limit")]
    Unreachable { target: f64, max_achievable: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{stage}: {source}")]
    Experiment {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

/// Coarse classification used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Encoding { .. }
            | Error::Unreachable { .. }
            | Error::Numerical(_)
            | Error::Degenerate(_) => ErrorClass::Numerical,
            Error::Io { .. } => ErrorClass::Io,
            Error::Experiment { source, .. } => source.class(),
            _ => ErrorClass::Validation,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

/// Attaches the experiment stage that failed.
pub(crate) trait Context<T> {
    fn stage(self, stage: &str) -> Result<T>;
}

impl<T> Context<T> for Result<T> {
    fn stage(self, stage: &str) -> Result<T> {
        self.map_err(|e| Error::Experiment {
            stage: stage.to_string(),
            source: Box::new(e),
        })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
