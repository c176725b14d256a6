use sobmuck_core::classify::ClassifyError;
use sobmuck_core::decide::DecideError;
use sobmuck_core::lambda::LambdaError;
use sobmuck_core::sobolev::SobolevError;
use sobmuck_core::MeasureError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Internal(_) | CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> CliError {
        CliError::Io { path: path.display().to_string(), source }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<LambdaError> for CliError {
    fn from(e: LambdaError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<DecideError> for CliError {
    fn from(e: DecideError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<SobolevError> for CliError {
    fn from(e: SobolevError) -> Self {
        match e {
            SobolevError::NoConvergence { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}
