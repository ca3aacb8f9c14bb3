use alloc::boxed::Box;
use alloc::string::String;

use crate::scalar::Scheme;

pub type Result<T> = core::result::Result<T, Error>;

/// Snapshot of the scalar equation that failed to produce a root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationState {
    pub scheme: Scheme,
    pub r_prev: f64,
    pub sqrt_ec: f64,
    pub a: f64,
    pub b: f64,
    pub en_prev: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("field contains non-finite values")]
    NonFinite,

    #[error("expected a {expected}-dimensional grid, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("E_N + C = {0} is not positive")]
    NonPositiveRadicand(f64),

    #[error("scalar equation has no root at lambda = {lambda}")]
    Unsolvable { lambda: f64, state: EquationState },

    #[error("no admissible weight in [0, 1]; even lambda = 1 is unsolvable")]
    NoAdmissibleWeight { state: EquationState },

    #[error("step {step} failed: {source}")]
    Step { step: u64, source: Box<Error> },

    #[error("unsupported initial condition: {0}")]
    Unsupported(&'static str),
}

impl Error {
    /// The innermost error, with any step wrapper removed.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root_cause(),
            other => other,
        }
    }

    pub fn is_unsolvable(&self) -> bool {
        matches!(
            self.root_cause(),
            Error::Unsolvable { .. } | Error::NoAdmissibleWeight { .. }
        )
    }
}
