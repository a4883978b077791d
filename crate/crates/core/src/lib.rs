//! Weighted belief propagation decoders trained with shell-based active sampling.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod active;
pub mod channel;
pub mod cli;
pub mod codes;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod rng;
pub mod shells;
pub mod training;

pub use error::{Error, Result};
