//! Randomized feedforward networks and the statistics around them.
//!
//! An extreme learning machine draws its hidden-layer parameters at random and
//! only fits the linear output layer. Each draw therefore yields a different
//! validation error. This crate provides:
//!
//! - [`network`]: forward evaluation of single and multi-layer randomized nets.
//! - [`training`]: closed-form output-layer fits (least squares, ridge),
//!   min-max input normalization and target trimming.
//! - [`criteria`]: evaluation criteria, quantile-decomposed MSPE and the
//!   margin-factor model comparison rule.
//! - [`crossval`]: J independent weight draws, per-draw validation MSPE,
//!   their mean and the best-draw selection.
//! - [`twostage`]: a two-stage rule picking the number of draws so that
//!   `mean ± d` is a fixed-width confidence interval.
//! - [`simulation`]: the synthetic experiment showing the spread of the
//!   validation error over weight draws as a function of the hidden width.
//! - [`vipv`]: the vehicle-integrated photovoltaics prediction pipeline.
//!
//! Every random quantity comes from an [`rng::RngStream`] addressed by
//! `(master_seed, stream_index)`, so results do not depend on evaluation
//! order or thread count.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. The `parallel` feature evaluates weight draws on the rayon pool.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` also rejects NaN; matrix kernels index several arrays per loop
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::excessive_precision
)]

extern crate alloc;

pub mod criteria;
pub mod crossval;
mod error;
pub mod linalg;
mod math;
pub mod network;
pub mod rng;
pub mod simulation;
pub mod training;
pub mod twostage;
pub mod vipv;

pub use error::{Error, Result};
pub use linalg::Matrix;
