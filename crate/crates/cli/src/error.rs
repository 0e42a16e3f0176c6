use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Numeric(#[from] thermoform::Error),
}

impl CliError {
    /// 3 for unusable input, 2 for numeric or convergence failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 3,
            CliError::Numeric(thermoform::Error::InvalidParameter(_)) => 3,
            CliError::Numeric(_) => 2,
        }
    }
}
