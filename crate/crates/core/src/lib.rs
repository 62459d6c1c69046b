//! Multivariate Gamma-Gamma (generalized-K) fading with arbitrary correlation:
//! joint PDF/CDF/MGF via a Green-matrix approximation of the correlation,
//! the sum distribution, SC/MRC/FSO receiver performance and a seeded
//! Monte-Carlo simulator to check every analytic value.
//!
//! The special functions and the joint series are generic over [`Real`]
//! (`f32`/`f64`); the aliases below name the `f64` instantiations used by
//! the performance, simulation and command-line layers.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod corrmat;
pub mod error;
pub mod fso;
pub mod mcsim;
pub mod mvgg;
pub mod quad;
pub mod real;
pub mod rxperf;
pub mod special;
pub mod sumdist;

pub use error::{Error, Result};
pub use real::Real;

pub type GgParams64 = mvgg::GgParams<f64>;
pub type Precision64 = mvgg::Precision<f64>;
pub type SeriesControl64 = mvgg::SeriesControl<f64>;
pub type SeriesValue64 = mvgg::SeriesValue<f64>;
pub type GgParams32 = mvgg::GgParams<f32>;
pub type Precision32 = mvgg::Precision<f32>;
pub type SeriesControl32 = mvgg::SeriesControl<f32>;
pub type SeriesValue32 = mvgg::SeriesValue<f32>;
