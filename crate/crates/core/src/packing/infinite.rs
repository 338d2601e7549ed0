//! Exact acceptance in the infinite-volume process.
//!
//! Whether a point is accepted depends only on its backward cone, so a
//! decision needs the field only on the (almost surely finite) backward
//! closure of the points of interest. The closure is grown lazily, cell by
//! cell, until it stops gaining members; the points found are then packed
//! sequentially.

use serde::Serialize;

use super::causal::{CausalCone, ConeDirection};
use super::explore::{ConeDiagnostics, Explorer};
use super::rsa::pack_flags;
use super::{PackedSample, Provenance, Rule};
use crate::error::Result;
use crate::input::{CellField, CellKey, Region, SpaceTimePoint, Substrate};
use crate::scalar::Scalar;

/// Exploration cap in cells: `200 * max(1, tau)`.
pub fn exploration_cap<T: Scalar>(field: &CellField<T>) -> i64 {
    let tau = field.tau().map(|t| t.as_f64()).unwrap_or(1.0);
    (200.0 * tau.max(1.0)).ceil() as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfiniteDecision {
    pub accepted: bool,
    pub diagnostics: ConeDiagnostics,
}

fn explorer_for<T: Scalar>(field: &CellField<T>, keys: impl Iterator<Item = CellKey>) -> Option<Explorer<'_, T>> {
    let d = field.dim();
    let mut lo: Option<CellKey> = None;
    let mut hi: Option<CellKey> = None;
    for k in keys {
        match (&mut lo, &mut hi) {
            (Some(l), Some(h)) => {
                for i in 0..d {
                    l[i] = l[i].min(k[i]);
                    h[i] = h[i].max(k[i]);
                }
            }
            _ => {
                lo = Some(k.clone());
                hi = Some(k);
            }
        }
    }
    Some(Explorer::new(field, lo?, hi?, exploration_cap(field)))
}

/// Acceptance of each test point against the infinite field, with the test
/// points inserted together (they may block one another).
pub fn sigma_infinite_joint<T: Scalar>(tests: &[SpaceTimePoint<T>], field: &CellField<T>) -> Result<(Vec<bool>, ConeDiagnostics)> {
    let (flags, diag, _) = joint_decision(tests, field)?;
    Ok((flags, diag))
}

/// As [`sigma_infinite_joint`], also returning the sorted tags of the
/// field points in the joint backward cone.
pub fn sigma_with_backward_tags<T: Scalar>(tests: &[SpaceTimePoint<T>], field: &CellField<T>) -> Result<(Vec<bool>, Vec<u64>)> {
    let (flags, _, tags) = joint_decision(tests, field)?;
    Ok((flags, tags))
}

fn joint_decision<T: Scalar>(tests: &[SpaceTimePoint<T>], field: &CellField<T>) -> Result<(Vec<bool>, ConeDiagnostics, Vec<u64>)> {
    field.tau()?;
    let Some(mut ex) = explorer_for(field, tests.iter().map(|p| field.cell_of(&p.x))) else {
        let diag = ConeDiagnostics { closure_size: 0, cells_loaded: 0, spatial_radius: 0.0 };
        return Ok((Vec::new(), diag, Vec::new()));
    };
    let members = ex.closure(tests, ConeDirection::Backward)?;
    let diag = ex.diagnostics(tests, &members);
    let mut tags: Vec<u64> = members.iter().filter_map(|&i| ex.points[i].tag).collect();
    tags.sort_unstable();

    // (point, Some(test index) for inserted test points)
    let mut local: Vec<(SpaceTimePoint<T>, Option<usize>)> = members.iter().map(|&i| (ex.points[i].clone(), None)).collect();
    let mut alias = vec![None; tests.len()];
    for (k, w) in tests.iter().enumerate() {
        if let Some(pos) = local.iter().position(|(p, _)| p.coincides(w)) {
            alias[k] = Some(pos);
        } else {
            local.push((w.clone(), Some(k)));
        }
    }
    // Field members keep their positions; inserted points follow. Sort a
    // permutation so both kinds can be located afterwards.
    let mut order: Vec<usize> = (0..local.len()).collect();
    order.sort_by(|&a, &b| local[a].0.arrival_cmp(&local[b].0));
    let sorted: Vec<SpaceTimePoint<T>> = order.iter().map(|&i| local[i].0.clone()).collect();
    let flags = pack_flags(&sorted);
    let mut flag_of = vec![false; local.len()];
    for (rank, &i) in order.iter().enumerate() {
        flag_of[i] = flags[rank];
    }
    let mut out = vec![false; tests.len()];
    for (i, (_, test)) in local.iter().enumerate() {
        if let Some(k) = test {
            out[*k] = flag_of[i];
        }
    }
    for (k, a) in alias.iter().enumerate() {
        if let Some(pos) = a {
            out[k] = flag_of[*pos];
        }
    }
    Ok((out, diag, tags))
}

/// Acceptance of `w` inserted into the infinite field.
pub fn sigma_infinite_with_diagnostics<T: Scalar>(w: &SpaceTimePoint<T>, field: &CellField<T>) -> Result<InfiniteDecision> {
    let (flags, diagnostics) = sigma_infinite_joint(std::slice::from_ref(w), field)?;
    Ok(InfiniteDecision { accepted: flags[0], diagnostics })
}

pub fn sigma_infinite<T: Scalar>(w: &SpaceTimePoint<T>, field: &CellField<T>) -> Result<bool> {
    Ok(sigma_infinite_with_diagnostics(w, field)?.accepted)
}

/// Every field point in `region`, flagged as in the infinite-volume
/// packing. No edge effects.
pub fn pack_window_infinite<T: Scalar>(field: &CellField<T>, region: &Region<T>) -> Result<PackedSample<T>> {
    let pts = field.sample_window(region)?;
    let provenance = Some(Provenance { seed: field.master_seed(), region: region.clone(), substrate: Substrate::Continuum });
    if pts.is_empty() {
        return Ok(PackedSample { points: pts, accepted: Vec::new(), rule: Rule::Sequential, provenance });
    }
    let mut ex = explorer_for(field, pts.iter().map(|p| field.cell_of(&p.x))).expect("non-empty");
    let members = ex.closure(&pts, ConeDirection::Backward)?;
    let closure: Vec<SpaceTimePoint<T>> = members.iter().map(|&i| ex.points[i].clone()).collect();
    let mut sorted: Vec<usize> = (0..closure.len()).collect();
    sorted.sort_by(|&a, &b| closure[a].arrival_cmp(&closure[b]));
    let ordered: Vec<_> = sorted.iter().map(|&i| closure[i].clone()).collect();
    let flags = pack_flags(&ordered);
    // Region points are field points, hence closure members; match by tag.
    let mut by_tag = std::collections::HashMap::with_capacity(ordered.len());
    for (p, f) in ordered.iter().zip(&flags) {
        by_tag.insert(p.tag.expect("field points are tagged"), *f);
    }
    let accepted = pts.iter().map(|p| by_tag[&p.tag.expect("field points are tagged")]).collect();
    Ok(PackedSample { points: pts, accepted, rule: Rule::Sequential, provenance })
}

/// Forward and backward cone of `w` (inserted) in the infinite field.
pub fn causal_cone_infinite<T: Scalar>(w: &SpaceTimePoint<T>, field: &CellField<T>) -> Result<CausalCone<T>> {
    field.tau()?;
    let mut ex = explorer_for(field, std::iter::once(field.cell_of(&w.x))).expect("one seed");
    let seeds = std::slice::from_ref(w);
    let mut idx = ex.closure(seeds, ConeDirection::Backward)?;
    idx.extend(ex.closure(seeds, ConeDirection::Forward)?);
    idx.sort_unstable();
    idx.dedup();
    let mut members: Vec<_> = idx.iter().map(|&i| ex.points[i].clone()).collect();
    if !members.iter().any(|m| m.coincides(w)) {
        members.push(w.clone());
    }
    members.sort_by(|a, b| a.arrival_cmp(b));
    Ok(CausalCone::from_members(w.clone(), members, ConeDirection::Both))
}
