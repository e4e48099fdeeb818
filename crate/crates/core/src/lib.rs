//! Twin multiview restricted kernel machines.
//!
//! Everything in this crate is pure computation over in-memory matrices and
//! builds without `std` (only `alloc` is required). File formats, the
//! benchmark runner and the command line live in the `twinview` crate.
//!
//! * [`kernel`]: RBF / linear kernels and view-summed Gram matrices
//! * [`solver`]: bordered (saddle-point) linear systems
//! * [`tmvrkm`]: the twin model, two bordered systems per fit
//! * [`mvrkm`]: the single-system multiview baseline
//! * [`data`], [`pca`], [`split`]: datasets, standardization, PCA second view, splits and folds
//! * [`eval`]: accuracy, grid-searched cross-validation, sweeps
//! * [`stats`]: average ranks, Friedman and Nemenyi statistics
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

extern crate alloc;

pub mod data;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod kernel;
pub mod mvrkm;
pub mod pca;
pub mod solver;
pub mod split;
pub mod stats;
pub mod tmvrkm;

pub use error::{Error, Result};

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;
