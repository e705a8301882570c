//! Degeneracy detection for planar N-body central configurations.
//!
//! A central configuration has a Jacobian with trivial zero eigenvalues forced
//! by translation, rotation and scaling symmetry. [`reduction`] conjugates the
//! Jacobian by a basis whose leading columns span those symmetries and reads
//! the verdict off the determinant of the remaining block `J2`.
//! [`certifier`] proves positivity of that determinant along the four-body
//! rhombus family with outward-rounded interval arithmetic from [`interval`].

// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cc;
pub mod certifier;
pub mod error;
pub mod families;
pub mod interval;
pub mod jacobian;
pub mod reduction;

pub use cc::{Configuration, Form, Masses, Scalars};
pub use error::{Error, Result};
pub use interval::{Interval, IntervalError, IntervalPoly};

/// Environment variable that forces every parallel code path to run sequentially.
pub const SEQUENTIAL_ENV: &str = "CCDEGEN_SEQUENTIAL";

/// False when [`SEQUENTIAL_ENV`] is set to anything other than `0` or empty.
pub fn parallel_enabled() -> bool {
    match std::env::var(SEQUENTIAL_ENV) {
        Ok(v) => v.is_empty() || v == "0",
        Err(_) => true,
    }
}
