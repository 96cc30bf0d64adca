use std::path::PathBuf;

use thiserror::Error;

use crate::params::AdmissibilityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` is not finite ({value})")]
    NonFinite { name: String, value: f64 },

    #[error("inadmissible parameters:\n{0}")]
    Inadmissible(Box<AdmissibilityReport>),

    #[error("exponential argument {arg} exceeds the overflow guard (|arg| > {limit})")]
    ExpOverflow { arg: f64, limit: f64 },

    #[error("zero pivot in tridiagonal elimination at row {row}")]
    ZeroPivot { row: usize },

    #[error("size mismatch: expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),

    #[error("time step {dt} exceeds the maximum-principle bound tau = {tau}")]
    TimeStepTooLarge { dt: f64, tau: f64 },

    #[error("initial {species} violates 0 <= u <= {ceiling} at node {node}: {value}")]
    InitialBound {
        species: &'static str,
        node: usize,
        value: f64,
        ceiling: f64,
    },

    #[error("{0}")]
    BoundViolation(Box<BoundViolation>),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot parse configuration: {0}")]
    ConfigParse(#[from] serde_json::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Study(String),
}

/// Details of a density leaving `[0, u_max]` beyond tolerance during a run.
#[derive(Debug, Clone)]
pub struct BoundViolation {
    pub step: usize,
    pub time: f64,
    pub species: &'static str,
    pub node: usize,
    pub value: f64,
    pub ceiling: f64,
    pub dump: String,
}

impl std::fmt::Display for BoundViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} left [0, {}] at step {} (t = {}), node {}: {:e}",
            self.species, self.ceiling, self.step, self.time, self.node, self.value
        )
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
