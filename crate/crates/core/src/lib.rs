//! Bayesian inference engines and generative stochastic models from pattern
//! theory, each paired with brute-force oracles in its tests.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the tolerances in the
//! documentation refer to.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bp;
pub mod error;
pub mod hmm;
pub mod image;
pub mod linalg;
pub mod mrf;
pub mod particle;
pub mod pcfg;
pub mod rng;
pub mod scalar;
pub mod shape;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Hmm = hmm::HmmModel<f64>;
pub type Posterior = hmm::PosteriorSequence<f64>;
pub type LinearGaussian = hmm::LinearGaussianModel<f64>;
pub type Matrix = linalg::Mat<f64>;
pub type Landmarks = shape::LandmarkState<f64>;
pub type Curve = shape::ShapeCurve<f64>;
pub type Image = image::ImageGrid<f64>;
