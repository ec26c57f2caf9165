use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),

    #[error("dark state undefined: both control fields vanish")]
    UndefinedDarkState,

    #[error("integration failed: {0}")]
    IntegrationFailure(String),

    #[error("spectrum has fewer than two local maxima")]
    NoSplitting,
}

impl Error {
    /// True for failures that come from the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalFailure(_)
                | Error::LinearSolveFailure(_)
                | Error::IntegrationFailure(_)
                | Error::NoSplitting
                | Error::UndefinedDarkState
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
