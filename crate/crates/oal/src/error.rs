use std::fmt;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Runtime,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Runtime => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Data => "data",
            ErrorKind::Runtime => "runtime",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn new(kind: ErrorKind, error: impl Into<anyhow::Error>) -> Self {
        Self { kind, error: error.into() }
    }

    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Self::new(ErrorKind::Config, error)
    }

    pub fn data(error: impl Into<anyhow::Error>) -> Self {
        Self::new(ErrorKind::Data, error)
    }

    pub fn runtime(error: impl Into<anyhow::Error>) -> Self {
        Self::new(ErrorKind::Runtime, error)
    }

    /// Classifies a core error by where it arises.
    pub fn from_core(error: oal_core::Error) -> Self {
        use oal_core::Error as E;
        let kind = match &error {
            E::Config(_) => ErrorKind::Config,
            E::Parse { .. }
            | E::Corpus(_)
            | E::Generation(_)
            | E::Split(_)
            | E::Sampling(_)
            | E::EmptyDescription
            | E::UnknownRegion(_) => ErrorKind::Data,
            _ => ErrorKind::Runtime,
        };
        Self::new(kind, error)
    }

    /// One-line JSON for machine consumers.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.kind.as_str(),
            "exit_code": self.kind.exit_code(),
            "message": format!("{:#}", self.error),
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {:#}", self.kind.as_str(), self.error)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;
