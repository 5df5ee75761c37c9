use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("series truncation failed: {0}")]
    Truncation(String),

    #[error("Laplace inversion unstable: {0}")]
    InversionUnstable(String),

    #[error("step budget exceeded after {used} steps (cap {cap})")]
    StepBudget { used: usize, cap: usize },

    #[error("requested horizon unreachable: {0}")]
    HorizonUnreachable(String),

    #[error("subset sum degenerates along the path at index {0}")]
    DegenerateSubsum(usize),

    #[error("distribution degenerates to a point mass: {0}")]
    DegenerateDistribution(String),

    #[error("insufficient samples: need at least {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("quadrature did not converge: {0}")]
    NonConvergent(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
