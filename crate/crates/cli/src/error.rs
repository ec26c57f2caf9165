use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Library(#[from] wgqed::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 2 for bad input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(e) if e.is_numerical() => 3,
            CliError::Io(_) => 1,
            _ => 2,
        }
    }

    /// Short machine-readable tag written to the `error` column of sweeps.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Library(e) => match e {
                wgqed::Error::InvalidArgument(_) => "invalid_argument",
                wgqed::Error::UnsupportedGeometry(_) => "unsupported_geometry",
                wgqed::Error::NumericalFailure(_) => "numerical_failure",
                wgqed::Error::LinearSolveFailure(_) => "linear_solve_failure",
                wgqed::Error::UndefinedDarkState => "undefined_dark_state",
                wgqed::Error::IntegrationFailure(_) => "integration_failure",
                wgqed::Error::NoSplitting => "no_splitting",
            },
        }
    }
}
