//! A-priori separable convolution layers, a parametric 2D wave-equation
//! data generator, and the training/evaluation harness that compares full
//! and decomposed convolutional surrogates.

pub mod conv;
pub mod decomp;
pub mod error;
pub mod harness;
pub mod nn;
pub mod svd;
pub mod tensor;
pub mod wave;

pub use error::{Error, Result};
pub use tensor::Tensor;
