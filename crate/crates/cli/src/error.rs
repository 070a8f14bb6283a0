use thiserror::Error;

/// Failures surfaced by the command line, split by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config files or parameter values. Exit status 1.
    #[error("configuration error: {0}")]
    Config(String),
    /// Everything that goes wrong after the inputs were accepted. Exit status 2.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<setchain::Error> for CliError {
    fn from(e: setchain::Error) -> Self {
        use setchain::Error as E;
        match e {
            E::Config(_) | E::InvalidInput(_) => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
