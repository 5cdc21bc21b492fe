use thiserror::Error;

use crate::gain_function::FunctionSpace;

/// Errors raised by the library. Constraint violations found by the checkers
/// are returned as data, not as errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("function is not a member of {space} ({violations} violated constraints); use l_of_f_full_grid for general functions")]
    NotInSpace {
        space: FunctionSpace,
        violations: usize,
    },

    #[error("input point is infeasible: row {row} ({label}) violated by {residual:e}")]
    InfeasiblePoint {
        row: usize,
        label: String,
        residual: f64,
    },

    #[error("solver stopped with status {status}")]
    Solver { status: String },

    #[error("lp parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
