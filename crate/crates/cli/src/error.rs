use thiserror::Error;

/// Failures of a CLI command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, arguments or input data (exit 2).
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data file could not be parsed (exit 2).
    #[error("data error: {0}")]
    Data(String),
    /// A numerical routine failed (exit 3).
    #[error("numerical failure in {op}: {source}")]
    Numerical {
        op: &'static str,
        #[source]
        source: scorebayes_core::Error,
    },
    /// Writing outputs failed (exit 1).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Data(_) => 2,
            Self::Numerical { .. } => 3,
            Self::Io(_) => 1,
        }
    }
}

/// Attaches the name of the failing operation to a core error.
pub fn numerical(op: &'static str) -> impl FnOnce(scorebayes_core::Error) -> CliError {
    move |source| CliError::Numerical { op, source }
}
