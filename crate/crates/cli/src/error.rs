use serde_json::{json, Value};
use thiserror::Error;
use whittaker::padic::PadicError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid JSON: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("cannot read input: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] whittaker::Error),
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

impl From<PadicError> for CliError {
    fn from(e: PadicError) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Json { .. } | CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Core(e) => e.exit_code(),
        }
    }

    /// Stable machine-readable name of the failure.
    pub fn code(&self) -> &'static str {
        use whittaker::Error as E;
        match self {
            CliError::Json { .. } => "invalid-json",
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e {
                E::Domain(_) => "domain",
                E::Precision(_) => "precision",
                E::RequiresExtension(_) => "requires-extension",
                E::Unsupported(_) => "unsupported",
                E::ConfigurationDrift(_) => "configuration-drift",
                E::NotWhittaker(_) => "not-whittaker",
                E::NotSplit(_) => "not-split",
                E::Parse(_) => "parse",
            },
        }
    }

    pub fn to_json(&self) -> Value {
        let mut err = json!({ "code": self.code(), "exit_code": self.exit_code(), "message": self.to_string() });
        if let CliError::Json { line, column, .. } = self {
            err["line"] = json!(line);
            err["column"] = json!(column);
        }
        json!({ "error": err })
    }
}
