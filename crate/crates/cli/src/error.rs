use stabfield::Error;

/// Failure classes with stable process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { .. }
            | Error::ProjectionFailed
            | Error::NonHermitian(_)
            | Error::EmptyWindow { .. }
            | Error::ThresholdNotBracketed { .. }
            | Error::InsufficientPoints(_) => CliError::Numeric(e.to_string()),
            Error::Io(io) => CliError::Io(io),
            other => CliError::Config(other.to_string()),
        }
    }
}
