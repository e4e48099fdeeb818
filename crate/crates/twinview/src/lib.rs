//! File formats, benchmark runner and command-line front end for the
//! `twinview-core` classifiers.
//!
//! - [`csvio`]: dataset CSVs, view bundles, accuracy tables
//! - [`model_io`]: model JSON
//! - [`config`], [`bench`], [`report`]: benchmark configs, runs and reports
//! - [`sweep_io`]: sensitivity grid CSV
//! - [`cli`]: the `twinview` binary

pub mod bench;
pub mod cli;
pub mod config;
pub mod csvio;
pub mod error;
pub mod model_io;
pub mod report;
pub mod sweep_io;

pub use error::{AppError, Result};
