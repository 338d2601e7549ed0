use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use super::rsa::visit_neighbour_keys;
use crate::input::{CellKey, SpaceTimePoint};
use crate::scalar::{dist, Scalar};

/// Oriented influence graph: `i -> j` iff `|x_i - x_j| <= 2`, `t_i <= t_j`
/// and `i != j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalGraph {
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl CausalGraph {
    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.inc[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.out[i].contains(&j)
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// All edges in `(from, to)` lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self.out.iter().enumerate().flat_map(|(i, v)| v.iter().map(move |&j| (i, j))).collect();
        e.sort_unstable();
        e
    }

    /// Indices reachable from `start` following edges forward (or backward),
    /// `start` included.
    pub fn reach(&self, start: usize, direction: ConeDirection) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut out = Vec::new();
        while let Some(i) = queue.pop_front() {
            out.push(i);
            let mut visit = |next: &[usize]| {
                for &j in next {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            };
            if matches!(direction, ConeDirection::Forward | ConeDirection::Both) {
                visit(&self.out[i]);
            }
            if matches!(direction, ConeDirection::Backward | ConeDirection::Both) {
                visit(&self.inc[i]);
            }
        }
        out.sort_unstable();
        out
    }
}

pub fn build_causal_graph<T: Scalar>(points: &[SpaceTimePoint<T>]) -> CausalGraph {
    let n = points.len();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let key = |x: &[T]| -> CellKey { x.iter().map(|&c| (c / two).floor().to_i64().unwrap_or(i64::MAX)).collect() };
    let mut cells: HashMap<CellKey, Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        cells.entry(key(&p.x)).or_default().push(i);
    }
    let mut out = vec![Vec::new(); n];
    let mut inc = vec![Vec::new(); n];
    for (i, p) in points.iter().enumerate() {
        visit_neighbour_keys(&key(&p.x), |k| {
            if let Some(ids) = cells.get(k) {
                for &j in ids {
                    if j != i && p.t <= points[j].t && p.dist2(&points[j]) <= four {
                        out[i].push(j);
                        inc[j].push(i);
                    }
                }
            }
        });
    }
    for v in out.iter_mut().chain(inc.iter_mut()) {
        v.sort_unstable();
    }
    CausalGraph { out, inc }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeDirection {
    Backward,
    Forward,
    Both,
}

/// Points linked to `root` by directed paths, `root` included.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalCone<T: Scalar> {
    pub root: SpaceTimePoint<T>,
    pub members: Vec<SpaceTimePoint<T>>,
    pub direction: ConeDirection,
    /// Largest spatial distance from the root over members.
    pub spatial_radius: T,
    /// Largest `|t - t_root|` over members.
    pub time_extent: T,
}

impl<T: Scalar> CausalCone<T> {
    pub(crate) fn from_members(root: SpaceTimePoint<T>, members: Vec<SpaceTimePoint<T>>, direction: ConeDirection) -> Self {
        let (r, te) = members.iter().fold((T::zero(), T::zero()), |(r, te), m| (r.max(dist(&m.x, &root.x)), te.max((m.t - root.t).abs())));
        CausalCone { root, members, direction, spatial_radius: r, time_extent: te }
    }

    pub fn contains(&self, p: &SpaceTimePoint<T>) -> bool {
        self.members.iter().any(|m| m.coincides(p))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn cone<T: Scalar>(w: &SpaceTimePoint<T>, points: &[SpaceTimePoint<T>], direction: ConeDirection) -> CausalCone<T> {
    let mut all: Vec<SpaceTimePoint<T>> = points.to_vec();
    let root = match all.iter().position(|p| p.coincides(w)) {
        Some(i) => i,
        None => {
            all.push(w.clone());
            all.len() - 1
        }
    };
    let g = build_causal_graph(&all);
    let mut members: Vec<_> = g.reach(root, direction).into_iter().map(|i| all[i].clone()).collect();
    members.sort_by(|a, b| a.arrival_cmp(b));
    CausalCone::from_members(w.clone(), members, direction)
}

/// Points of `points` from which `w` can be reached (plus `w`).
pub fn backward_cone<T: Scalar>(w: &SpaceTimePoint<T>, points: &[SpaceTimePoint<T>]) -> CausalCone<T> {
    cone(w, points, ConeDirection::Backward)
}

/// Points of `points` reachable from `w` (plus `w`).
pub fn forward_cone<T: Scalar>(w: &SpaceTimePoint<T>, points: &[SpaceTimePoint<T>]) -> CausalCone<T> {
    cone(w, points, ConeDirection::Forward)
}

/// Union of the forward and backward cones.
pub fn causal_cone<T: Scalar>(w: &SpaceTimePoint<T>, points: &[SpaceTimePoint<T>]) -> CausalCone<T> {
    let b = backward_cone(w, points);
    let f = forward_cone(w, points);
    let mut members = b.members;
    for m in f.members {
        if !members.iter().any(|p| p.coincides(&m)) {
            members.push(m);
        }
    }
    members.sort_by(|a, b| a.arrival_cmp(b));
    CausalCone::from_members(w.clone(), members, ConeDirection::Both)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::{Aabb, CellField, Region};
    use crate::packing::rsa::pack_flags;
    use proptest::prelude::*;

    fn p(x: f64, t: f64) -> SpaceTimePoint<f64> {
        SpaceTimePoint::new(&[x], t)
    }

    fn chain() -> Vec<SpaceTimePoint<f64>> {
        vec![p(0.0, 0.1), p(1.0, 0.2), p(2.5, 0.3)]
    }

    #[test]
    fn chain_edges() {
        let g = build_causal_graph(&chain());
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        assert!(!g.has_edge(0, 2));
    }

    #[test]
    fn boundary_distance_two_is_an_edge() {
        let g = build_causal_graph(&[p(0.0, 0.1), p(2.0, 0.5)]);
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn isolated_points_have_no_edges() {
        let pts: Vec<_> = (0..6).map(|i| p(i as f64 * 2.5, 0.1 * i as f64)).collect();
        assert_eq!(build_causal_graph(&pts).edge_count(), 0);
        let c = backward_cone(&pts[3], &pts);
        assert_eq!(c.members, vec![pts[3].clone()]);
        assert_eq!(c.spatial_radius, 0.0);
    }

    #[test]
    fn chain_cones() {
        let pts = chain();
        let c = backward_cone(&pts[2], &pts);
        assert_eq!(c.members, pts);
        assert_eq!(c.spatial_radius, 2.5);
        assert!((c.time_extent - 0.2).abs() < 1e-12);
        let c = backward_cone(&pts[1], &pts);
        assert_eq!(c.members, pts[..2].to_vec());
        let f = forward_cone(&pts[0], &pts);
        assert_eq!(f.members, pts);
        let both = causal_cone(&pts[1], &pts);
        assert_eq!(both.len(), 3);
    }

    #[test]
    fn inserted_test_point() {
        let pts = chain();
        let w = p(4.0, 0.9);
        let c = backward_cone(&w, &pts);
        // w reaches back to (2.5, 0.3) and through it the whole chain
        assert_eq!(c.len(), 4);
        assert!(c.contains(&w));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        // The flag of every point is decided by its backward cone alone.
        #[test]
        fn backward_cone_suffices(seed in any::<u64>(), d in 1usize..=2) {
            let f = CellField::<f64>::continuum(seed, d, 1.0).unwrap();
            let lo = vec![0.0; d];
            let hi = vec![if d == 1 { 40.0 } else { 10.0 }; d];
            let pts = f.sample_window(&Region::from_box(Aabb::new(&lo, &hi).unwrap())).unwrap();
            let flags = pack_flags(&pts);
            let g = build_causal_graph(&pts);
            for (i, &flag) in flags.iter().enumerate() {
                let idx = g.reach(i, ConeDirection::Backward);
                let sub: Vec<_> = idx.iter().map(|&k| pts[k].clone()).collect();
                let local = pack_flags(&sub);
                let pos = idx.iter().position(|&k| k == i).unwrap();
                prop_assert_eq!(local[pos], flag);
            }
        }
    }
}
