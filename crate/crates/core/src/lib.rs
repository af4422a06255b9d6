//! Coordinate descent for separable primal-dual problems with fixed and
//! adaptive coordinate sampling, duality-gap certificates and checks of the
//! per-iteration convergence inequalities.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod data;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod problems;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
