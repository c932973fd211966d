use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate element {element}: chord length {length:e} below threshold {threshold:e}")]
    DegenerateElement {
        element: usize,
        length: f64,
        threshold: f64,
    },

    #[error(
        "singular system: pivot {pivot} has magnitude {magnitude:e} (tolerance {tolerance:e})"
    )]
    Singular {
        pivot: usize,
        magnitude: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step {step} (t = {time}): {source}")]
    AtStep {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("run with J = {elements}, dt = {dt:e}: {source}")]
    Study {
        elements: usize,
        dt: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown scenario '{name}' (valid: {valid})")]
    UnknownScenario { name: String, valid: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed snapshot: {reason}")]
    Snapshot { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Strips step/study annotations and returns the underlying cause.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } | Error::Study { source, .. } => source.root(),
            other => other,
        }
    }
}
