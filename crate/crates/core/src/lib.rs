//! Monte Carlo laboratory for random sequential adsorption (RSA) and
//! related space-time packing processes.
//!
//! The crate is organised bottom-up:
//!
//! * [`input`]: lazily realised Poisson input on continuum and lattice
//!   substrates, keyed by cell so the infinite process is well defined.
//! * [`packing`]: the sequential acceptance rule, the oriented influence
//!   graph and its cones, exact infinite-volume acceptance on windows,
//!   lattice jamming, desorption and birth-growth variants.
//! * [`correlation`]: estimators for acceptance probabilities, correlation
//!   functions, clustering and the covariance constant.
//! * [`limits`]: rescaled count vectors, Gaussianity diagnostics, boundary
//!   processes and cone-tail experiments.
//! * [`nn`]: nearest-neighbour edge-length measures and stabilisation.
//! * [`stats`]: small numerical helpers shared by the estimators.
//!
//! Geometry and packing are generic over [`Scalar`] (`f32` or `f64`); the
//! estimators run in `f64`. The aliases below name the `f64` instances.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod error;
pub mod input;
pub mod limits;
pub mod nn;
pub mod packing;
pub mod parallel;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point = input::SpaceTimePoint<f64>;
pub type Point32 = input::SpaceTimePoint<f32>;
pub type Field = input::CellField<f64>;
pub type Field32 = input::CellField<f32>;
pub type Region = input::Region<f64>;
pub type Aabb = input::Aabb<f64>;
pub type Sample = packing::PackedSample<f64>;
