//! Error type shared by all modules.

use core::fmt;

/// Errors reported by construction and estimation operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Grid construction rejected degenerate parameters.
    InvalidGrid(&'static str),
    /// The requested grid exceeds the size limit of this operation.
    GridTooLarge { cells: u128, max: u128 },
    /// An operation requiring samples received none.
    EmptySamples,
    /// Point or mode-set dimension does not match the expected one.
    DimensionMismatch { expected: usize, got: usize },
    /// A scalar parameter is outside its admissible range.
    InvalidParameter(&'static str),
    /// Evaluation point lies outside `[0,1]^d`.
    OutOfDomain,
    /// An operation requiring a nonempty diagram received an empty one.
    EmptyDiagram,
    /// An operation requiring nonempty mode sets received an empty one.
    EmptyModeSet,
    /// Density normalization failed (zero or non-finite mass).
    DegenerateDensity,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            Error::GridTooLarge { cells, max } => {
                write!(f, "grid has {cells} cells, limit for this operation is {max}")
            }
            Error::EmptySamples => write!(f, "sample set is empty"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::OutOfDomain => write!(f, "evaluation point outside [0,1]^d"),
            Error::EmptyDiagram => write!(f, "persistence diagram is empty"),
            Error::EmptyModeSet => write!(f, "mode set is empty"),
            Error::DegenerateDensity => write!(f, "density has zero or non-finite mass"),
        }
    }
}

impl core::error::Error for Error {}
