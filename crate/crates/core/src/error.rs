use alloc::string::String;

/// Errors raised by the simulator core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not Hermitian (max |M - M^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("operator does not commute with total Sz (max |[H, Sz]| = {0:e})")]
    NotConserved(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid site list: {0}")]
    Sites(String),

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error(
        "level continuation failed between e-field {from} and {to}: \
         best overlap {overlap:.3} stays below threshold at maximal refinement"
    )]
    Continuation { from: f64, to: f64, overlap: f64 },

    #[error("no threshold temperature bracketed by [{lo}, {hi}]")]
    NoThreshold { lo: f64, hi: f64 },

    #[error("degenerate cycle integral: {0}")]
    Degenerate(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
