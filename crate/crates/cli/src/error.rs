use std::fmt::Display;

/// CLI failures, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or invalid input: exit code 2.
    #[error("input error: {0}")]
    Input(String),
    /// The solver stopped without meeting its acceptance tests: exit code 3.
    #[error("solver did not converge: {0}")]
    Solver(String),
}

impl CliError {
    pub fn input(context: &str, err: impl Display) -> Self {
        CliError::Input(format!("{context}: {err}"))
    }

    /// Prefixes the message, keeping the kind.
    pub fn context(self, ctx: impl Display) -> Self {
        match self {
            CliError::Input(m) => CliError::Input(format!("{ctx}: {m}")),
            CliError::Solver(m) => CliError::Solver(format!("{ctx}: {m}")),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<elastic_geodesics::Error> for CliError {
    fn from(e: elastic_geodesics::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
