//! Sampling, reconstruction and mobile sensor relocation for time-varying
//! graph signals.
//!
//! Sensors observe a graph signal at `K` of `N` nodes. Unobserved values are
//! recovered by projecting onto a learned signal subspace, the subspace
//! (dictionary) is tracked online from reconstructed history, and each sensor
//! moves within its graph-Voronoi region, at most `P` hops per step, to the
//! node that best complements the rest of the fleet.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `parallel` feature to
//! run the per-sensor relocation loop on rayon.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dictionary;
mod error;
pub mod filter;
pub mod graph;
pub mod linalg;
pub mod placement;
pub mod sampling;
pub mod signal;

pub use error::{Error, Result};

pub use nalgebra::{DMatrix, DVector};
