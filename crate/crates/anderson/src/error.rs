use anderson_core::Error;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    BoundFailure = 1,
    BadInput = 2,
    Resource = 3,
    Solver = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    BadInput(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
}

impl CliError {
    pub fn bad_input(msg: impl Into<String>) -> Self {
        Self::BadInput(msg.into())
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::BadInput(_) | Self::Format(_) => ExitCode::BadInput,
            Self::Io { .. } => ExitCode::Resource,
            Self::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &Error) -> ExitCode {
    match e {
        Error::BudgetExceeded { .. } | Error::Overflow { .. } => ExitCode::Resource,
        Error::NonConvergence { .. } | Error::Singular { .. } => ExitCode::Solver,
        Error::SampleFailed { source, .. } => core_exit_code(source),
        _ => ExitCode::BadInput,
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Format(format!("json: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Format(format!("csv: {e}"))
    }
}
