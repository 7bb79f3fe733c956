//! Differential protection of phase-angle regulating transformers by
//! transient simulation, wavelet/time-series features and data-driven
//! classifiers.

pub mod detect;
pub mod error;
pub mod eval;
pub mod features;
pub mod models;
pub mod par;
pub mod pipeline;
pub mod select;
pub mod sim;

pub use error::{Error, Result};
