use thiserror::Error;

use crate::engine::SolveError;
use crate::measure::MeasureError;
use crate::netlist::{ElaborateError, ParseError};

/// Any failure along the parse → elaborate → simulate → measure pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("elaboration error: {0}")]
    Elaborate(#[from] ElaborateError),
    #[error("solver error: {0}")]
    Solve(#[from] SolveError),
    #[error("measurement error: {0}")]
    Measure(#[from] MeasureError),
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
