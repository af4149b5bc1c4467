//! Sparse training of spiking neural networks with linearized Bregman
//! iterations.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: dense tensors and a portable PRNG
//! - [`bregman`]: soft-thresholding, sub-gradients, Bregman distance, sparsity counts
//! - [`optim`]: SGD, Adam, LinBreg, AdaBreg, learning-rate schedules, checkpoints
//! - [`snn`]: LIF networks with surrogate-gradient BPTT
//! - [`data`]: spike-count datasets, the SPK1 format and synthetic tasks
//! - [`train`]: training loop, evaluation and λ-sweeps
//! - [`cli`]: the `breg-snn` command line

// `!(x >= 0.0)` style range checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod binio;
pub mod bregman;
pub mod cli;
pub mod data;
pub mod error;
pub mod numerics;
pub mod optim;
pub mod snn;
pub mod train;

pub use error::{Error, FormatError, Result};
pub use numerics::{Rng, Tensor};
