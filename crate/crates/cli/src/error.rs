use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("solver: {0}")]
    Solver(blocc::BloccError),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl From<blocc::BloccError> for CliError {
    fn from(e: blocc::BloccError) -> Self {
        match e {
            blocc::BloccError::Config(m) => CliError::Config(m),
            blocc::BloccError::Parse { .. } => CliError::Io(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Solver(_) => 3,
            CliError::CheckFailed(_) => 4,
        }
    }

    /// One-line `kind: detail` reason for the error stream.
    pub fn reason(&self) -> String {
        self.to_string().replace('\n', " ")
    }
}
