//! Experiment harness: sweeps over fixtures and parameters, calibration of
//! the constants, CSV persistence and the `gelfand` CLI.

pub mod calibrate;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod report;

pub use error::{HarnessError, Result};
