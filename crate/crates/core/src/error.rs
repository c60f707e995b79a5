use crate::channel::Capacity;
use crate::region::BoundaryRun;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("degradation condition violated at prefix index {index} ({lhs} > {rhs})")]
    Infeasible { index: usize, lhs: f64, rhs: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("capacity iteration did not converge after {iterations} iterations (gap {gap:e})")]
    CapacityNotConverged {
        iterations: usize,
        gap: f64,
        best: Box<Capacity>,
    },

    #[error("boundary ascent did not converge after {iterations} iterations (last gain {last_gain:e})")]
    BoundaryNotConverged {
        iterations: usize,
        last_gain: f64,
        best: Box<BoundaryRun>,
    },

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
