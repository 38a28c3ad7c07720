use thiserror::Error;

use crate::bipartite::Edge;

/// Errors produced by instance validation, solvers and checkers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("edge ({}, {}) out of range for instance size n={}", .edge.i, .edge.j, .n)]
    EdgeOutOfRange { edge: Edge, n: usize },

    #[error("edge list is not a planar matching: {reason}")]
    NotPlanar { reason: String },

    #[error("edge ({}, {}) has length {} exceeding cap L={}", .edge.i, .edge.j, .length, .cap)]
    LengthExceeded { edge: Edge, length: usize, cap: usize },

    #[error("length cap L={cap} invalid for instance size n={n}")]
    InvalidCap { cap: usize, n: usize },

    #[error("edge-count constraint tau={tau} invalid (must satisfy 1 <= tau <= {max})")]
    InvalidTau { tau: usize, max: usize },

    #[error("instance size n={n} exceeds brute-force guard {max}")]
    TooLarge { n: usize, max: usize },

    #[error("only {good} of the required {needed} segments contain an edge under the threshold")]
    InsufficientSegments { good: usize, needed: usize },

    #[error("gamma={gamma} outside (0, 1/2]")]
    InvalidGamma { gamma: f64 },

    #[error("got {got} trials, need at least {needed}")]
    InsufficientTrials { got: usize, needed: usize },

    #[error("trial count must be positive")]
    NoTrials,

    #[error("need at least {needed} grid points, got {got}")]
    TooFewPoints { got: usize, needed: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance has no edge states")]
    StatesMissing,

    #[error("instance has no edge weights")]
    WeightsMissing,

    #[error("weight at ({i}, {j}) is {value}; weights must be finite and >= 0")]
    InvalidWeight { i: usize, j: usize, value: f64 },

    #[error("probability at ({i}, {j}) is {value}; must lie in [0, 1]")]
    InvalidProbability { i: usize, j: usize, value: f64 },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for errors caused by invalid input rather than internal failures.
    /// The CLI maps these to exit code 2, everything else to 1.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
