//! Prediction-based adaptation for low-delay HTTP adaptive live streaming.
//!
//! The crate is `no_std` (with `alloc`) and contains every algorithmic piece
//! of the system:
//!
//! * [`trace`]: throughput traces, resampling and descriptive statistics.
//! * [`predict`]: one-step-ahead throughput predictors on multiple time scales.
//! * [`error_prob`]: relative prediction errors, the signed error ECDF,
//!   download success probabilities and truncated distribution fitting.
//! * [`adaptation`]: LOLYPOP, the tune-in rule and the baselines.
//! * [`sim`]: the deterministic virtual-time session engine.
//! * [`analysis`]: operating points, quality frontiers and curve comparison.
//!
//! File formats, the sweep runner and the command line live in the companion
//! `lolypop` crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub(crate) mod math;

pub mod adaptation;
pub mod analysis;
pub mod error_prob;
pub mod predict;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
