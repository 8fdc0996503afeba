use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch: expected {expected} samples, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("tail extrapolation failed: {0}")]
    TailExtrapolation(String),

    #[error("integration accuracy lost: {0}")]
    IntegrationAccuracy(String),

    #[error("boundary condition violated: {0}")]
    BoundaryCondition(String),

    #[error("field outside the smallness regime: {0}")]
    Smallness(String),

    #[error("reconstruction failed: {0}")]
    Reconstruction(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("grid resolution insufficient: {0}")]
    Resolution(String),

    #[error("inconsistent gauge fields: {0}")]
    Consistency(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical breakdown.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_) | Error::Shape { .. } | Error::Format(_) | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
