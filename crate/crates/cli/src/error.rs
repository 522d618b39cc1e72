use std::fmt;
use std::path::Path;

use dppdesign::Error;

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Config = 1,
    Io = 2,
    Numeric = 3,
    Budget = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
    pub hint: Option<String>,
}

impl CliError {
    pub fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            hint: None,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ExitKind::Config, message)
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self::new(ExitKind::Io, format!("{}: {err}", path.display()))
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error: {}", self.message)?;
        if let Some(h) = &self.hint {
            write!(f, "\nhint: {h}")?;
        }
        Ok(())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::InvalidParameter(_) => ExitKind::Config,
            Error::NonSquare { .. }
            | Error::Parse { .. }
            | Error::EmptyMatrix
            | Error::EmptyTrace
            | Error::Format { .. }
            | Error::Io { .. } => ExitKind::Io,
            Error::BudgetExceeded { .. } | Error::TooFewExceedances { .. } => ExitKind::Budget,
            _ => ExitKind::Numeric,
        };
        let hint = match &e {
            Error::UnjitteredTie { .. } => Some("rerun with --jitter-sigma 1e-8 to break ties".to_string()),
            Error::TooFewExceedances { .. } => Some("lower --threshold-quantile or use a longer trace".to_string()),
            Error::BudgetExceeded { .. } => Some("raise --exhaustive-limit or pick a smaller instance".to_string()),
            _ => None,
        };
        Self {
            kind,
            message: e.to_string(),
            hint,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
