use thiserror::Error;

use crate::coeffs::Scalar;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `e^u = e^v` with `u != v`: a genuine pole of the BCH coefficient.
    #[error("pole of the BCH coefficient at u = {u}, v = {v} (e^u = e^v with u != v)")]
    Pole { u: Scalar, v: Scalar },

    #[error("step index {n} is outside the series order {order}")]
    Order { n: usize, order: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix dimension {0} outside the supported range")]
    Dimension(usize),

    #[error("matrix 1-norm {0} too large to exponentiate in double precision")]
    Overflow(f64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no normalization convention satisfies the dissipator commutator: {0}")]
    Convention(String),

    #[error("invalid matrix file: {0}")]
    MatrixFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
