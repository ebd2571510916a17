use thiserror::Error;
use tracecoef_core::parse::GRAMMAR;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation: exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Malformed symbol text: exit code 2, printed with the grammar.
    #[error("cannot parse {what}: {source}\n\nsymbol grammar:\n{GRAMMAR}")]
    Symbol {
        what: &'static str,
        source: tracecoef_core::Error,
    },
    /// The computation itself refused the input: exit code 1.
    #[error("{0}")]
    Domain(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Symbol { .. } => 2,
            CliError::Domain(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<tracecoef_core::Error> for CliError {
    fn from(e: tracecoef_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<tracecoef_oracle::OracleError> for CliError {
    fn from(e: tracecoef_oracle::OracleError) -> Self {
        CliError::Domain(e.to_string())
    }
}
