use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} complex coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point lies outside the domain (or within the interior margin of its boundary)")]
    PointOutsideDomain,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("value {value} outside the admissible range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("closed Euclidean ball of radius {radius} is not contained in the domain")]
    BallNotContained { radius: f64 },

    #[error("sample counts must be positive (points = {points}, directions = {dirs})")]
    InvalidSampleCounts { points: usize, dirs: usize },

    #[error("no lattice path joins the endpoints; refine the lattice")]
    NoFeasiblePath,

    #[error("adaptive quadrature did not converge on [{a}, {b}] within the depth limit")]
    QuadratureNonConvergence { a: f64, b: f64 },

    #[error("path is not constant on zero interval #{index} (variation {variation:e})")]
    NotConstantOnInterval { index: usize, variation: f64 },

    #[error("collapsing the zero intervals leaves a degenerate horizon {tau}")]
    DegenerateResult { tau: f64 },

    #[error("path is constant (total length {length:e})")]
    ConstantPath { length: f64 },

    #[error("arc-length function is not invertible: flat on [{a}, {b}]")]
    NotInvertible { a: f64, b: f64 },

    #[error("inversion residual {residual:e} exceeds tolerance {tolerance:e}")]
    InversionFailed { residual: f64, tolerance: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
