use thiserror::Error;

/// Errors raised by graph construction and the estimators built on top of it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertex {vertex} is not in a graph with {n_vertices} vertices")]
    InvalidVertex { vertex: usize, n_vertices: usize },

    #[error("graph has no fiber-labeled edges to stretch")]
    NoFiberEdges,

    #[error("neighborhood has {size} vertices, above the canonical-form cap of {cap}")]
    SizeCapExceeded { size: usize, cap: usize },

    #[error("distributions have different radii ({0} vs {1})")]
    RadiusMismatch(usize, usize),

    #[error("level cutoff {cutoff} leaves tail mass {tail:e} (need < 1e-9)")]
    CutoffTooSmall { cutoff: usize, tail: f64 },

    #[error("graph has an empty boundary")]
    EmptyBoundary,

    #[error("insufficient bulk: {0}")]
    InsufficientBulk(String),

    #[error("connection profile is zero at every usable distance")]
    AllZeroProfile,

    #[error("curve never crosses the target level on [0, 1]")]
    NonCrossingCurve,

    #[error("linear solver did not converge: residual {residual:e} after {iterations} iterations")]
    SolverNonConvergence { residual: f64, iterations: usize },

    #[error("io failure: {0}")]
    Io(String),

    #[error("malformed graph export: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn out_of_range(msg: impl Into<String>) -> Error {
    Error::ParameterOutOfRange(msg.into())
}
