use thiserror::Error;

/// Exit codes: 0 all checks pass, 1 a check failed or errored, 2 the
/// config is invalid, 3 a reproduction did not match.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },

    #[error("config error: {0}")]
    Invalid(String),

    #[error("output error: {0}")]
    Output(String),

    #[error("report error: {0}")]
    Report(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Invalid(_) | CliError::Output(_) => 2,
            CliError::Report(_) => 3,
        }
    }
}
