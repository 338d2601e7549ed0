use std::collections::HashMap;

use super::{PackedSample, Rule};
use crate::error::{Error, Result};
use crate::input::{CellKey, SpaceTimePoint};
use crate::scalar::{dist2, Scalar};

/// Open unit balls at `a` and `b` overlap.
pub fn overlaps<T: Scalar>(a: &[T], b: &[T]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::Dimension { expected: a.len(), got: b.len() });
    }
    Ok(dist2(a, b) < T::lit(4.0))
}

/// Uniform hash grid of side 2 over accepted centres.
pub(crate) struct BallGrid<T: Scalar> {
    cells: HashMap<CellKey, Vec<usize>>,
    // flat `id * dim` layout; ids may be sparse
    centres: Vec<T>,
    dim: usize,
    side: T,
}

impl<T: Scalar> BallGrid<T> {
    pub(crate) fn new(side: T) -> Self {
        BallGrid { cells: HashMap::new(), centres: Vec::new(), dim: 0, side }
    }

    fn key(&self, x: &[T]) -> CellKey {
        x.iter().map(|&c| (c / self.side).floor().to_i64().unwrap_or(i64::MAX)).collect()
    }

    pub(crate) fn insert(&mut self, id: usize, x: &[T]) {
        self.dim = x.len();
        if self.centres.len() < (id + 1) * self.dim {
            self.centres.resize((id + 1) * self.dim, T::zero());
        }
        self.centres[id * self.dim..(id + 1) * self.dim].copy_from_slice(x);
        let k = self.key(x);
        self.cells.entry(k).or_default().push(id);
    }

    pub(crate) fn remove(&mut self, id: usize) {
        let k = self.key(self.centre(id));
        if let Some(v) = self.cells.get_mut(&k) {
            v.retain(|&j| j != id);
        }
    }

    /// Any stored centre with `dist2 < r2` (r must not exceed the side).
    pub(crate) fn any_within(&self, x: &[T], r2: T) -> bool {
        let mut found = false;
        let base = self.key(x);
        visit_neighbour_keys(&base, |k| {
            if found {
                return;
            }
            if let Some(ids) = self.cells.get(k) {
                found = ids.iter().any(|&j| dist2(self.centre(j), x) < r2);
            }
        });
        found
    }

    /// Any stored centre within the 3^d cells around `x` satisfying
    /// `pred(id, dist2)`.
    pub(crate) fn any_near(&self, x: &[T], mut pred: impl FnMut(usize, T) -> bool) -> bool {
        let mut found = false;
        let base = self.key(x);
        visit_neighbour_keys(&base, |k| {
            if found {
                return;
            }
            if let Some(ids) = self.cells.get(k) {
                found = ids.iter().any(|&j| pred(j, dist2(self.centre(j), x)));
            }
        });
        found
    }

    pub(crate) fn centre(&self, id: usize) -> &[T] {
        &self.centres[id * self.dim..(id + 1) * self.dim]
    }
}

/// Calls `f` for each of the 3^d keys around `base`.
pub(crate) fn visit_neighbour_keys(base: &[i64], mut f: impl FnMut(&CellKey)) {
    let d = base.len();
    let mut off = vec![-1i64; d];
    loop {
        let k: CellKey = base.iter().zip(&off).map(|(b, o)| b + o).collect();
        f(&k);
        let mut i = 0;
        loop {
            if i == d {
                return;
            }
            if off[i] < 1 {
                off[i] += 1;
                break;
            }
            off[i] = -1;
            i += 1;
        }
    }
}

/// Sequential acceptance flags for arrival-sorted points.
pub fn pack_flags<T: Scalar>(points: &[SpaceTimePoint<T>]) -> Vec<bool> {
    let mut grid = BallGrid::new(T::lit(2.0));
    let four = T::lit(4.0);
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let ok = !grid.any_within(&p.x, four);
            if ok {
                grid.insert(i, &p.x);
            }
            ok
        })
        .collect()
}

/// Random sequential adsorption of time-sorted input.
pub fn pack_sequential<T: Scalar>(points: Vec<SpaceTimePoint<T>>) -> Result<PackedSample<T>> {
    if let Some(d) = points.first().map(|p| p.dim()) {
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::Dimension { expected: d, got: p.dim() });
        }
    }
    if let Some(i) = points.windows(2).position(|w| w[0].arrival_cmp(&w[1]).is_gt()) {
        return Err(Error::Unsorted(i + 1));
    }
    let accepted = pack_flags(&points);
    Ok(PackedSample { points, accepted, rule: Rule::Sequential, provenance: None })
}

/// Minimum pairwise distance of the selected points is at least 2.
pub fn check_hard_core<'a, T: Scalar>(points: impl IntoIterator<Item = &'a SpaceTimePoint<T>>) -> bool {
    let mut grid = BallGrid::new(T::lit(2.0));
    let four = T::lit(4.0);
    for (i, p) in points.into_iter().enumerate() {
        if grid.any_within(&p.x, four) {
            return false;
        }
        grid.insert(i, &p.x);
    }
    true
}
