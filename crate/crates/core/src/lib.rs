//! Boundary data completion for the Laplace equation on a rectangle by an
//! iterated space-marching observer, plus spectral diagnostics of the
//! underlying first-order system.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anderson;
#[cfg(feature = "cli")]
pub mod cli;
pub mod discrete_ops;
pub mod error;
pub mod gain;
pub mod grid;
pub mod observer;
pub mod reference;
pub mod spectral;

pub use error::{Error, Result};
