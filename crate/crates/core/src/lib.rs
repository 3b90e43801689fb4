//! Metric-geometry toolkit: pulled metric spaces, sewn manifolds, rotationally
//! symmetric manifolds with nonnegative scalar curvature, and volume-based
//! curvature diagnostics.

// `!(x > 0.0)` is used on purpose so NaN fails the guard
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod metric;
pub mod pulled;
pub mod rotsym;
pub mod scalar;
pub mod sewing;

pub use error::{Error, Result};
