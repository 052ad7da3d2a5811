//! File formats, batch sweeps and analysis outputs around `lolypop-core`.
//!
//! The binary in `main.rs` is a thin command-line layer over these modules.

#![forbid(unsafe_code)]

mod error;
pub mod frontier;
pub mod io;
pub mod predict_eval;
pub mod sweep;

pub use error::{HarnessError, Result};
