//! Nearest-neighbour graph edge-length measures, their rescaled box
//! vectors and an empirical stabilisation radius.

mod graph;
mod rescaled;
mod stabilize;

pub use graph::{brute_force_nn, nn_measure, nn_total_length_brute, NnGraph, WeightedPointMeasure};
pub use rescaled::{nn_box_measures_infinite, nn_raw_measures, nn_rescaled_samples, spatial_sample};
pub use stabilize::{stabilization_radius, ProbeConfig, StabilizationReport};
