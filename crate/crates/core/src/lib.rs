//! Weak limits of products of orthogonal polynomials whose measure moves
//! with the degree, and the spectral matrix measure of the doubly infinite
//! Jacobi matrix they converge to.

// `!(x > 0.0)` rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bilateral;
pub mod error;
pub mod families;
pub mod jacobi;
pub mod recurrence;
pub mod spectral;
pub mod weak;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
