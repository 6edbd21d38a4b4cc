use alloc::boxed::Box;
use alloc::string::String;

use crate::factored::FactoredMatrix;
use crate::solvers::SolveTrace;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Best-so-far triplets from a truncated SVD that ran out of Lanczos steps.
#[derive(Clone, Debug)]
pub struct PartialSvd {
    pub best: FactoredMatrix,
    /// Number of leading triplets that met the tolerance.
    pub converged: usize,
    pub steps: usize,
    /// Largest residual bound among the requested triplets, relative to σ₁.
    pub max_residual: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },

    #[error("vector length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("index ({i}, {j}) out of bounds for a {m}x{n} matrix")]
    IndexOutOfBounds { i: usize, j: usize, m: usize, n: usize },

    #[error("duplicate index ({i}, {j})")]
    DuplicateIndex { i: usize, j: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("truncated SVD did not converge after {} Lanczos steps ({} triplets converged, residual {:.3e})", .0.steps, .0.converged, .0.max_residual)]
    SvdNotConverged(Box<PartialSvd>),

    #[error("solver failed at iteration {iteration}: {cause}")]
    SolveFailed { iteration: usize, cause: Box<Error>, trace: Box<SolveTrace> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
