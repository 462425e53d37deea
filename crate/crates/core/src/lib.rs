//! Subsampled line-search spectral gradient methods for finite-sum problems.
//!
//! The crate is organised bottom-up:
//!
//! - [`problems`]: finite-sum oracles (random quadratics, L2-regularised
//!   logistic regression) and dataset ingestion.
//! - [`sampling`]: the periodic resampling schedule, uniform and adaptive
//!   importance samplers.
//! - [`steplength`]: spectral (Barzilai-Borwein) coefficients and damping.
//! - [`linesearch`]: the nonmonotone Armijo search with safeguarded
//!   quadratic interpolation.
//! - [`solvers`]: iteration drivers for SLiSeS and the baseline methods.
//! - [`harness`]: experiment runner, CSV traces, aggregation and the CLI
//!   plumbing.

pub mod error;
pub mod harness;
pub mod linesearch;
pub mod meter;
pub mod par;
pub mod problems;
pub mod sampling;
pub mod solvers;
pub mod steplength;

pub use error::{Error, Result};
pub use meter::EvalMeter;

/// Dense vector type used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;
