use thiserror::Error;

/// Failures of a command, split by the exit status they map to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input files, arguments or configuration. Exit status 2.
    #[error("{0}")]
    Input(String),
    /// The command started but could not finish. Exit status 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<irg_gkss::Error> for CliError {
    fn from(e: irg_gkss::Error) -> Self {
        use irg_gkss::Error as E;
        match e {
            E::Argument(_) | E::Parse { .. } | E::Io { .. } | E::Unsupported(_) | E::Capacity { .. } => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
