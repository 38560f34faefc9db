//! Diffeomorphic time warping with residual networks.
//!
//! Warps are built by Euler-integrating continuous piecewise-affine (CPA)
//! velocity fields, one per residual block, each predicted from convolutional
//! features of the input. Every emitted warp is strictly increasing and fixes
//! the endpoints of `[0, 1]`, whatever the parameter values.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below are the concrete types the trainer, file formats and CLI use.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autodiff;
pub mod baselines;
pub mod data;
pub mod error;
pub mod interp;
pub mod linalg;
pub mod model;
pub mod objectives;
pub mod scalar;
pub mod series;
pub mod trainer;
pub mod warp;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use series::TimeSeries;

pub type TimeSeries64 = series::TimeSeries<f64>;
pub type WarpFunction64 = warp::WarpFunction<f64>;
pub type Tessellation64 = warp::Tessellation<f64>;
pub type CpaVelocityField64 = warp::CpaVelocityField<f64>;
pub type Tensor64 = autodiff::Tensor<f64>;
pub type Tape64 = autodiff::Tape<f64>;
pub type ModelParams64 = model::ModelParams<f64>;
pub type SigmaPrior64 = objectives::SigmaPrior<f64>;
pub type Dataset64 = data::Dataset<f64>;
pub type Batch64 = objectives::Batch<f64>;
