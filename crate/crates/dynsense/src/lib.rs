//! Experiment harness for dynamic sensor placement on graphs.
//!
//! Builds synthetic and gridded-data scenarios, runs the dynamic method
//! against fixed-placement baselines over seeded replicates, and writes the
//! results as CSV and JSON lines. The numerical work lives in
//! [`dynsense_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod harness;
pub mod io;
pub mod standin;

pub use error::{Error, Result};
