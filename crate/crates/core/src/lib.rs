//! Effective-parameter discovery for input–output models.
//!
//! The crate samples a model's input space, evaluates its outputs, and
//! applies diffusion maps with kernels informed by those outputs. Level
//! sets of the leading diffusion coordinates then reveal neutral (sloppy)
//! directions, effective parameters and singular-perturbation regimes.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod autodiff;
pub mod dmaps;
pub mod error;
pub mod figures;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod models;
pub mod parallel;
pub mod pellet;
pub mod sampling;

pub use error::{Error, Result};
