//! Linear time-varying control systems `x' + A(t) x = B(t) u`, `y = C(t) x`:
//! evolution families, Gramians, controllability/observability duality,
//! minimum-energy steering and Hautus-type observability tests.

// NaN must fail these checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod duality;
pub mod error;
pub mod gramian;
pub mod hautus;
pub(crate) mod json;
pub mod propagate;
pub mod rng;
pub mod synth;
pub mod sysmodel;

pub use error::{Error, Result};
