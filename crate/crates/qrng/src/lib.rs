//! File formats, configuration and the `qrng` command-line pipeline on top
//! of [`qrng_core`].
//!
//! ```text
//! qrng simulate --seed 7 --out run
//! qrng g2       --tags run/tags.ptag --out run
//! qrng extract  --tags run/tags.ptag --out run
//! qrng test     --bits run/unbiased.qbit --out run
//! qrng report   --run run --out run
//! ```
//!
//! `qrng pipeline --seed 7 --out run` does all five and writes the same
//! files. Exit codes: 0 success, 2 invalid input or configuration, 3 I/O
//! error, 4 the battery did not pass.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod fsio;

pub use error::{Error, Result};
