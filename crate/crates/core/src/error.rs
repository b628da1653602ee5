//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Distance from the aperture (or module) center to the target point
    /// falls outside the radiative near-field band where focusing works.
    #[error(
        "target at {distance:.4} m violates the radiative near-field zone \
         [{lower:.4}, {upper:.4}] m"
    )]
    ZoneViolation {
        distance: f64,
        lower: f64,
        upper: f64,
    },

    #[error("point ({0:.3}, {1:.3}, {2:.3}) lies outside the room box")]
    PointOutsideRoom(f64, f64, f64),

    #[error("channel entry {index} has zero magnitude; matched phase is undefined")]
    ZeroChannelEntry { index: usize },

    #[error("reference module signal is zero; phase alignment is undefined")]
    ZeroReferenceSignal,

    #[error("power field sums to zero; focus radius is undefined")]
    ZeroTotalPower,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("no active modules for this target position")]
    NoActiveModules,

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
