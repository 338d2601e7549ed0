//! Reproducible Poisson space-time input.
//!
//! A [`CellField`] is an infinite, lazily realised Poisson process: the
//! points of each spatial cell are a pure function of the master seed and
//! the cell index, so any window of the infinite process can be sampled
//! in any order, on any thread, and always yields the same configuration.

mod field;
mod point;
mod region;
pub mod rng;

pub(crate) use field::for_each_in_range;
pub use field::{CellField, CellKey, Substrate, TimeCutoff};
pub use point::{Coord, SpaceTimePoint};
pub use region::{Aabb, Region};
