//! Std companion to `vbht-core`: the parallel Monte Carlo harness, input
//! parsing, CSV/JSON/SVG output and the `vbht` command-line tool.

pub mod cli;
mod error;
pub mod experiments;
pub mod format;
pub mod input;
pub mod svg;

pub use error::{Error, Result};
