//! Core library: decoding-configuration discrimination over generated text.
//!
//! The pieces fit together left to right: `gen` produces articles under a
//! decoding configuration, `data` turns labeled articles into fixed splits
//! and token id sequences, `zoo` defines the classifier family, `train`
//! fits and scores them, and `autodiff` supplies the numerics underneath.

pub mod autodiff;
pub mod checkpoint;
pub mod data;
pub mod error;
pub mod gen;
pub mod manifest;
pub mod scalar;
pub mod seeding;
pub mod train;
pub mod zoo;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default-precision aliases; every public generic has an f64 shorthand.
pub type Tensor64 = autodiff::Tensor<f64>;
pub type Graph64 = autodiff::Graph<f64>;
pub type Adam64 = autodiff::Adam<f64>;
