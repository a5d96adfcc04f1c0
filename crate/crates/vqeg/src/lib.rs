//! Command-line harness, file formats and sweep runner for the VQEG solver.

pub mod cli;
pub mod config;
pub mod error;
pub mod matrix_io;
pub mod runner;
pub mod sweep;
pub mod trace;

pub use error::{Error, Result};
