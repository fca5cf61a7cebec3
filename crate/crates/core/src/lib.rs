//! Exact support recovery of sparse signals from noisy Gaussian measurements.
//!
//! The crate models `Y = A X + Z` with a `k`-sparse `X`, computes the
//! multiple-access style rate threshold `c(w)` and the sample-complexity
//! formulas built on it, implements distance decoding with magnitude
//! estimation over an epsilon-net of candidate values (plus ML and OMP
//! baselines), and provides a seeded, worker-count independent Monte Carlo
//! harness for checking all of it at desk scale.
//!
//! Indices are 0-based inside the library. Anything user facing (CLI, JSON,
//! CSV) is 1-based.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decoders;
pub mod error;
pub mod experiments;
pub mod rng;
pub mod signal;
pub mod stats;
pub mod tail;
pub mod thresholds;

pub use error::{Error, Result};
