//! Acceptance dynamics.
//!
//! Packing uses open balls (overlap iff distance `< 2`), the influence
//! graph uses `<= 2`; the graph is therefore a superset of every actual
//! blocking relation, which is what the locality arguments need.

mod causal;
mod desorption;
mod explore;
mod growth;
mod infinite;
mod lattice;
mod marks;
mod rsa;

use serde::Serialize;

use crate::input::{Region, SpaceTimePoint, Substrate};
use crate::scalar::Scalar;

pub use causal::{backward_cone, build_causal_graph, causal_cone, forward_cone, CausalCone, CausalGraph, ConeDirection};
pub use desorption::{desorb_sequential, simulate_desorption, DesorptionEvent};
pub use explore::ConeDiagnostics;
pub use growth::{grow_sequential, simulate_birth_growth};
pub use infinite::{
    causal_cone_infinite, exploration_cap, pack_window_infinite, sigma_infinite, sigma_infinite_joint, sigma_infinite_with_diagnostics,
    sigma_with_backward_tags, InfiniteDecision,
};
pub use lattice::{jam_lattice_window, jam_sites, lattice_block_times, lattice_neighbour_offsets, LatticeJammer};
pub use marks::filter_by_mark;
pub(crate) use rsa::visit_neighbour_keys;
pub use rsa::{check_hard_core, overlaps, pack_flags, pack_sequential};

/// Which rule produced the flags of a [`PackedSample`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    /// Plain sequential adsorption.
    Sequential,
    /// Flags mark balls still adsorbed at the horizon.
    Desorption { rate: f64, horizon: f64 },
    /// Flags mark accepted seeds.
    BirthGrowth { speed: f64, initial_radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance<T: Scalar> {
    pub seed: u64,
    pub region: Region<T>,
    pub substrate: Substrate,
}

/// Input points with their acceptance flags.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedSample<T: Scalar> {
    pub points: Vec<SpaceTimePoint<T>>,
    pub accepted: Vec<bool>,
    pub rule: Rule,
    pub provenance: Option<Provenance<T>>,
}

impl<T: Scalar> PackedSample<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn accepted_points(&self) -> impl Iterator<Item = &SpaceTimePoint<T>> {
        self.points.iter().zip(&self.accepted).filter_map(|(p, &a)| a.then_some(p))
    }

    pub fn accepted_count(&self) -> usize {
        self.accepted.iter().filter(|&&a| a).count()
    }

    /// Accepted points whose location lies in `region`.
    pub fn count_in(&self, region: &Region<T>) -> usize {
        self.accepted_points().filter(|p| region.contains(&p.x)).count()
    }

    /// Re-runs the sequential rule and compares flags. Only meaningful for
    /// [`Rule::Sequential`] samples.
    pub fn flags_reproduce(&self) -> bool {
        pack_flags(&self.points) == self.accepted
    }
}
