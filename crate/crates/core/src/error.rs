use thiserror::Error;

use crate::interval::IntervalError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid masses: {0}")]
    InvalidMasses(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("bodies {i} and {j} collide (distance {distance:e})")]
    Collision { i: usize, j: usize, distance: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("symmetry generators have rank {rank}, expected {expected}")]
    DegenerateBasis { rank: usize, expected: usize },

    #[error("not a central configuration: residual {residual:e} exceeds {threshold:e}")]
    NotCentral { residual: f64, threshold: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change of detJ2 on [{lo}, {hi}] and no root at the minimum (|detJ2| = {min_abs:e})")]
    NoSignChange { lo: f64, hi: f64, min_abs: f64 },

    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error(transparent)]
    Interval(#[from] IntervalError),
}

pub type Result<T> = std::result::Result<T, Error>;
