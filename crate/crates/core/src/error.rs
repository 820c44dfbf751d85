use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("time {0} is not a partition node")]
    NonNodeTime(f64),
    #[error("Picard iteration did not contract after {iterations} iterations (residuals {residuals:?})")]
    Divergence { iterations: usize, residuals: Vec<f64> },
    #[error("no convergence after {refinements} refinements (residuals {residuals:?})")]
    NoConvergence { refinements: usize, residuals: Vec<f64> },
    #[error("well-posedness failure: {0}")]
    WellPosedness(String),
    #[error("unsupported family: {0}")]
    Unsupported(String),
    #[error("step rejected: {0}")]
    StepRejected(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
