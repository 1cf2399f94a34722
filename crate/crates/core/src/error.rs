use thiserror::Error;

use crate::symplectic::ModeLabel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("number of modes must be between 1 and 3, got {0}")]
    InvalidModeCount(usize),

    #[error("mode {0} is not part of this state")]
    MissingMode(ModeLabel),

    #[error("mode selection is empty")]
    EmptyModeSet,

    #[error("two-mode squeezer needs two distinct modes, got {0} twice")]
    SameMode(ModeLabel),

    #[error("mode mismatch: map acts on {map:?}, state has {state:?}")]
    ModeMismatch {
        map: Vec<ModeLabel>,
        state: Vec<ModeLabel>,
    },

    #[error("matrix has shape {rows}x{cols}, expected {expected}x{expected}")]
    BadShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("result overflows double precision (s = {s}, r = {r})")]
    Overflow { s: f64, r: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("state is unphysical: smallest symplectic eigenvalue {0} < 1/2")]
    Unphysical(f64),

    #[error("eigen-solver failed to converge")]
    EigenSolver,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("closed form invalid: {0}")]
    InvalidClosedForm(String),

    #[error("cutoff {cutoff} too small: truncation tail {tail:e} exceeds {limit:e}")]
    CutoffTooSmall {
        cutoff: usize,
        tail: f64,
        limit: f64,
    },
}
