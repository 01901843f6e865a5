//! Rate control built on a composite discrete Cauchy model of transform
//! coefficients, together with a small block-transform codec simulator that
//! closes the control loop.
//!
//! The crate is organised bottom-up:
//!
//! * [`coeff`] histograms, the composite Cauchy model and its baselines.
//! * [`quant`] hard quantization, level probabilities, entropy and distortion.
//! * [`rd`] frame-level rate/distortion predictors and lambda derivation.
//! * [`alloc`] GOP budgeting, influence factors, QP clips and frame-level
//!   bit allocation.
//! * [`sim`] the codec simulator and the sequence-level control loop.
//! * [`report`] CSV emitters shared by the command-line driver.

pub mod alloc;
pub mod coeff;
mod error;
pub mod quant;
pub mod rd;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
