//! Task-oriented benchmarking of community detection.
//!
//! Communities found by a detector become binary node features; a boosted
//! tree classifier then tries to infer held-out node attributes from them.
//! Better communities make the attributes easier to infer.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod benchmark;
pub mod classifier;
pub mod cover;
pub mod detectors;
pub mod error;
pub mod graph;
pub mod order;

pub use error::{Error, Result};
