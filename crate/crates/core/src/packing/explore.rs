//! Lazy exploration of the infinite input around a set of seeds.

use std::collections::{HashMap, VecDeque};
use std::ops::Range;

use serde::Serialize;

use super::causal::ConeDirection;
use super::rsa::visit_neighbour_keys;
use crate::error::{Error, Result};
use crate::input::{CellField, CellKey, SpaceTimePoint};
use crate::scalar::{dist, Scalar};

/// How far an exact decision had to look.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeDiagnostics {
    /// Members of the explored closure (field points only).
    pub closure_size: usize,
    /// Cells realised during exploration.
    pub cells_loaded: usize,
    /// Largest distance from the nearest seed to a closure member.
    pub spatial_radius: f64,
}

/// Field points realised so far, stored cell by cell in one arena.
pub(crate) struct Explorer<'f, T: Scalar> {
    field: &'f CellField<T>,
    pub(crate) points: Vec<SpaceTimePoint<T>>,
    cells: HashMap<CellKey, Range<usize>>,
    anchor_lo: CellKey,
    anchor_hi: CellKey,
    cap: i64,
}

impl<'f, T: Scalar> Explorer<'f, T> {
    /// `anchor_*` bound the starting cells; loading a cell farther than
    /// `cap` cells (Chebyshev) from that box is an error.
    pub(crate) fn new(field: &'f CellField<T>, anchor_lo: CellKey, anchor_hi: CellKey, cap: i64) -> Self {
        Explorer { field, points: Vec::new(), cells: HashMap::new(), anchor_lo, anchor_hi, cap }
    }

    pub(crate) fn cells_loaded(&self) -> usize {
        self.cells.len()
    }

    fn load(&mut self, key: &CellKey) -> Result<Range<usize>> {
        if let Some(r) = self.cells.get(key) {
            return Ok(r.clone());
        }
        let beyond = key
            .iter()
            .zip(self.anchor_lo.iter().zip(&self.anchor_hi))
            .map(|(&k, (&lo, &hi))| (lo - k).max(k - hi).max(0))
            .max()
            .unwrap_or(0);
        if beyond > self.cap {
            return Err(Error::ExplorationCap { cap: self.cap });
        }
        let pts = self.field.cell_points(key)?;
        let start = self.points.len();
        self.points.extend(pts);
        let r = start..self.points.len();
        self.cells.insert(key.clone(), r.clone());
        Ok(r)
    }

    /// Arena indices of all field points in the 3^d cells around `x`.
    pub(crate) fn around(&mut self, x: &[T]) -> Result<Vec<usize>> {
        let base = self.field.cell_of(x);
        let mut keys = Vec::new();
        visit_neighbour_keys(&base, |k| keys.push(k.clone()));
        let mut out = Vec::new();
        for k in keys {
            out.extend(self.load(&k)?);
        }
        Ok(out)
    }

    /// Field points in the cone closure of `seeds`: every field point
    /// linked to some seed by a directed path of the influence graph in the
    /// requested direction. Seeds themselves are traversed as graph nodes
    /// whether or not they belong to the field. Returned indices are sorted.
    pub(crate) fn closure(&mut self, seeds: &[SpaceTimePoint<T>], direction: ConeDirection) -> Result<Vec<usize>> {
        let four = T::lit(4.0);
        let mut in_closure: Vec<bool> = Vec::new();
        let mut members = Vec::new();
        let mut queue: VecDeque<(Vec<T>, T)> = seeds.iter().map(|s| (s.x.to_vec(), s.t)).collect();
        while let Some((x, t)) = queue.pop_front() {
            let cand = self.around(&x)?;
            if in_closure.len() < self.points.len() {
                in_closure.resize(self.points.len(), false);
            }
            for i in cand {
                if in_closure[i] {
                    continue;
                }
                let p = &self.points[i];
                let ordered = match direction {
                    ConeDirection::Backward => p.t <= t,
                    ConeDirection::Forward => p.t >= t,
                    ConeDirection::Both => true,
                };
                if ordered && crate::scalar::dist2(&p.x, &x) <= four {
                    in_closure[i] = true;
                    members.push(i);
                    queue.push_back((p.x.to_vec(), p.t));
                }
            }
        }
        members.sort_unstable();
        Ok(members)
    }

    pub(crate) fn diagnostics(&self, seeds: &[SpaceTimePoint<T>], members: &[usize]) -> ConeDiagnostics {
        let radius = members
            .iter()
            .map(|&i| seeds.iter().map(|s| dist(&s.x, &self.points[i].x).as_f64()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        ConeDiagnostics { closure_size: members.len(), cells_loaded: self.cells_loaded(), spatial_radius: radius }
    }
}
