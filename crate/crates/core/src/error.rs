//! Error type shared by all solver modules.

use thiserror::Error;

/// Errors produced by grid construction, operator application and solvers.
///
/// Loss of finiteness during a run is deliberately *not* an error: blow-up
/// is signalled through run status flags so that the trailing diagnostics
/// remain available for extrapolation.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: operands live on different grids ({0})")]
    GridMismatch(String),

    #[error("dimension mismatch: expected {expected}D, got {found}D")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("axis {axis} out of range for a {dim}D field")]
    InvalidAxis { axis: usize, dim: usize },

    #[error("CFL violation at t = {time}: courant {courant:.3e} exceeds guard {guard}")]
    CflViolation { time: f64, courant: f64, guard: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration rejected: {0}")]
    Config(String),

    #[error("degenerate deformation gradient (condition estimate {cond:.3e})")]
    DegenerateDeformation { cond: f64 },

    #[error("estimate refused: {0}")]
    EstimateRefused(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("nonpositive value in {0}")]
    NonPositive(String),

    #[error("Hermitian symmetry violated: {0}")]
    SymmetryViolation(String),

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CoreError {
    fn from(e: std::io::Error) -> Self {
        CoreError::Io(e.to_string())
    }
}
