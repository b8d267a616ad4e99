//! Discrete bi-parameter Littlewood–Paley g-function experiments on
//! non-homogeneous measures over the torus.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carleson;
pub mod error;
pub mod gfunction;
pub mod grid;
pub mod haar;
pub mod harness;
pub mod kernel;
pub mod lattice;
pub mod measure;
pub mod report;
pub mod seed;

pub use error::{Error, Result};
