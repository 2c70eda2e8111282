use std::io;
use std::path::PathBuf;

use levelsim::measure::MeasureError;
use levelsim::Error as CoreError;
use thiserror::Error;

/// Exit codes. Usage and I/O problems share code 1.
pub mod code {
    pub const USAGE: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const SOLVE: u8 = 3;
    pub const MEASURE: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("writing output: {0}")]
    Output(#[from] io::Error),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{failed} of {total} rows failed")]
    Rows {
        failed: usize,
        total: usize,
        code: u8,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => core_code(e),
            CliError::Rows { code, .. } => *code,
            _ => code::USAGE,
        }
    }
}

pub fn core_code(e: &CoreError) -> u8 {
    match e {
        CoreError::Parse(_) | CoreError::Elaborate(_) => code::PARSE,
        CoreError::Solve(_) | CoreError::Measure(MeasureError::Solve(_)) => code::SOLVE,
        CoreError::Measure(_) => code::MEASURE,
        CoreError::Invalid(_) => code::USAGE,
    }
}

/// Measurement failures that mean the circuit never switched cleanly.
pub fn is_non_functional(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::Measure(
            MeasureError::NoTransition { .. }
                | MeasureError::MissingDirection { .. }
                | MeasureError::NoSettledWindow { .. }
        )
    )
}
