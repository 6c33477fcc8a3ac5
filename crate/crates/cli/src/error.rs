use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] hycast::Error),

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Validation ran but at least one check failed.
    #[error("{0} validation check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    /// 2 for bad input, 1 for numerical failures.
    pub fn exit_code(&self) -> ExitCode {
        let input = match self {
            CliError::Usage(_) | CliError::File { .. } => true,
            CliError::Core(e) => e.is_input_error(),
            CliError::Csv(_) | CliError::Io(_) | CliError::ChecksFailed(_) => false,
        };
        ExitCode::from(if input { 2 } else { 1 })
    }
}
