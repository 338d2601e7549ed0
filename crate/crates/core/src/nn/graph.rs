use std::cmp::Ordering;
use std::collections::HashMap;

use serde::Serialize;

use crate::input::{CellKey, Region};
use crate::packing::visit_neighbour_keys;
use crate::scalar::{dist2, Scalar};

/// `(distance², coordinates)` order; the lexicographically smaller point
/// wins a tie.
pub(crate) fn closer<T: Scalar>(d_a: T, a: &[T], d_b: T, b: &[T]) -> bool {
    match d_a.partial_cmp(&d_b) {
        Some(Ordering::Less) => true,
        Some(Ordering::Greater) => false,
        _ => a.iter().zip(b).find_map(|(p, q)| p.partial_cmp(q).filter(|o| o.is_ne())) == Some(Ordering::Less),
    }
}

/// Nearest neighbour of each point by exhaustive search.
pub fn brute_force_nn<T: Scalar>(points: &[Vec<T>]) -> Vec<Option<usize>> {
    (0..points.len())
        .map(|i| {
            let mut best: Option<(usize, T)> = None;
            for (j, q) in points.iter().enumerate() {
                if j == i {
                    continue;
                }
                let d = dist2(&points[i], q);
                if best.is_none_or(|(b, bd)| closer(d, q, bd, &points[b])) {
                    best = Some((j, d));
                }
            }
            best.map(|b| b.0)
        })
        .collect()
}

/// Total edge length of the undirected nearest-neighbour graph, computed
/// without the grid.
pub fn nn_total_length_brute<T: Scalar>(points: &[Vec<T>]) -> f64 {
    let nn = brute_force_nn(points);
    let mut edges: Vec<(usize, usize)> = nn.iter().enumerate().filter_map(|(i, j)| j.map(|j| (i.min(j), i.max(j)))).collect();
    edges.sort_unstable();
    edges.dedup();
    edges.iter().map(|&(a, b)| dist2(&points[a], &points[b]).sqrt().as_f64()).sum()
}

/// Uniform grid over a point set.
struct Grid<'a, T: Scalar> {
    points: &'a [Vec<T>],
    side: T,
    cells: HashMap<CellKey, Vec<usize>>,
    lo: CellKey,
    hi: CellKey,
}

impl<'a, T: Scalar> Grid<'a, T> {
    fn new(points: &'a [Vec<T>]) -> Self {
        let d = points.first().map_or(1, Vec::len);
        let mut lo = vec![T::infinity(); d];
        let mut hi = vec![T::neg_infinity(); d];
        for p in points {
            for k in 0..d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let ext = lo.iter().zip(&hi).fold(0.0f64, |m, (l, h)| m.max((*h - *l).as_f64()));
        let side = T::lit((ext / (points.len().max(1) as f64).powf(1.0 / d as f64)).max(1e-6));
        let mut g = Grid { points, side, cells: HashMap::new(), lo: CellKey::new(), hi: CellKey::new() };
        for (i, p) in points.iter().enumerate() {
            g.cells.entry(g.key(p)).or_default().push(i);
        }
        g.lo = g.key(&lo);
        g.hi = g.key(&hi);
        g
    }

    fn key(&self, x: &[T]) -> CellKey {
        x.iter().map(|&c| (c / self.side).floor().to_i64().unwrap_or(0)).collect()
    }

    fn nearest(&self, i: usize) -> Option<usize> {
        let x = &self.points[i];
        let c = self.key(x);
        let max_ring = c.iter().zip(self.lo.iter().zip(&self.hi)).map(|(&k, (&l, &h))| (k - l).max(h - k)).max().unwrap_or(0);
        let mut best: Option<(usize, T)> = None;
        for ring in 0..=max_ring {
            if let Some((_, bd)) = best {
                // cells in this ring are at least (ring - 1) sides away
                let gap = self.side * T::lit((ring - 1).max(0) as f64);
                if gap * gap > bd {
                    break;
                }
            }
            for_each_ring(&c, ring, |k| {
                if let Some(ids) = self.cells.get(k) {
                    for &j in ids {
                        if j == i {
                            continue;
                        }
                        let d = dist2(x, &self.points[j]);
                        if best.is_none_or(|(b, bd)| closer(d, &self.points[j], bd, &self.points[b])) {
                            best = Some((j, d));
                        }
                    }
                }
            });
        }
        best.map(|b| b.0)
    }
}

fn for_each_ring(c: &[i64], ring: i64, mut f: impl FnMut(&CellKey)) {
    if ring == 0 {
        f(&c.iter().copied().collect());
        return;
    }
    if ring == 1 {
        visit_neighbour_keys(c, |k| {
            if k.as_slice() != c {
                f(k)
            }
        });
        return;
    }
    let d = c.len();
    let mut off = vec![-ring; d];
    loop {
        if off.iter().any(|o| o.abs() == ring) {
            let k: CellKey = c.iter().zip(&off).map(|(a, b)| a + b).collect();
            f(&k);
        }
        let mut i = 0;
        while i < d {
            off[i] += 1;
            if off[i] <= ring {
                break;
            }
            off[i] = -ring;
            i += 1;
        }
        if i == d {
            break;
        }
    }
}

/// Nearest-neighbour graph of a finite point set: each point is joined to
/// its nearest neighbour, and the undirected union of these edges is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct NnGraph<T: Scalar> {
    pub points: Vec<Vec<T>>,
    pub nn: Vec<Option<usize>>,
}

impl<T: Scalar> NnGraph<T> {
    pub fn new(points: Vec<Vec<T>>) -> Self {
        let nn = if points.len() < 64 {
            brute_force_nn(&points)
        } else {
            let g = Grid::new(&points);
            (0..points.len()).map(|i| g.nearest(i)).collect()
        };
        NnGraph { points, nn }
    }

    pub fn nn_distance(&self, i: usize) -> Option<f64> {
        self.nn[i].map(|j| dist2(&self.points[i], &self.points[j]).sqrt().as_f64())
    }

    /// Undirected edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self.nn.iter().enumerate().filter_map(|(i, j)| j.map(|j| (i.min(j), i.max(j)))).collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    pub fn total_length(&self) -> f64 {
        self.edges().iter().map(|&(a, b)| self.length(a, b)).sum()
    }

    fn length(&self, a: usize, b: usize) -> f64 {
        dist2(&self.points[a], &self.points[b]).sqrt().as_f64()
    }

    /// Half of every incident edge length on each point.
    pub fn measure(&self) -> WeightedPointMeasure<T> {
        let mut weights = vec![0.0; self.points.len()];
        for (a, b) in self.edges() {
            let h = self.length(a, b) / 2.0;
            weights[a] += h;
            weights[b] += h;
        }
        WeightedPointMeasure { points: self.points.clone(), weights }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedPointMeasure<T: Scalar> {
    pub points: Vec<Vec<T>>,
    pub weights: Vec<f64>,
}

impl<T: Scalar> WeightedPointMeasure<T> {
    pub fn of(&self, region: &Region<T>) -> f64 {
        self.points.iter().zip(&self.weights).filter(|(p, _)| region.contains(p)).map(|(_, w)| w).sum()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Nearest-neighbour edge-length measure of `region`. Fewer than two
/// points give zero.
pub fn nn_measure<T: Scalar>(points: &[Vec<T>], region: &Region<T>) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    NnGraph::new(points.to_vec()).measure().of(region)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::Aabb;
    use proptest::prelude::*;

    fn everything(d: usize) -> Region<f64> {
        Region::from_box(Aabb::new(&vec![-1e9; d], &vec![1e9; d]).unwrap())
    }

    fn pts(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn two_points() {
        let m = NnGraph::new(pts(&[0.0, 3.0])).measure();
        assert_eq!(m.weights, vec![1.5, 1.5]);
        assert_eq!(nn_measure(&pts(&[0.0, 3.0]), &everything(1)), 3.0);
        assert_eq!(nn_measure(&pts(&[0.0]), &everything(1)), 0.0);
    }

    #[test]
    fn three_collinear_points() {
        let g = NnGraph::new(pts(&[0.0, 1.0, 5.0]));
        assert_eq!(g.nn, vec![Some(1), Some(0), Some(1)]);
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(g.measure().weights, vec![0.5, 2.5, 2.0]);
        assert_eq!(g.total_length(), 5.0);
    }

    #[test]
    fn ties_go_to_the_lexicographically_smaller_point() {
        let g = NnGraph::new(pts(&[0.0, -1.0, 1.0]));
        assert_eq!(g.nn[0], Some(1));
        let g = NnGraph::new(vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![-1.0, 0.0]]);
        assert_eq!(g.nn[0], Some(3));
    }

    #[test]
    fn ring_enumeration_covers_the_shell() {
        let mut n = 0;
        for_each_ring(&[0, 0], 2, |k| {
            assert_eq!(k.iter().map(|c| c.abs()).max(), Some(2));
            n += 1;
        });
        assert_eq!(n, 16);
    }

    fn cloud(d: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-30.0..30.0f64, d), 2..max)
    }

    proptest! {
        #[test]
        fn grid_matches_brute_force(p in cloud(2, 300)) {
            let g = NnGraph::new(p.clone());
            prop_assert_eq!(g.nn, brute_force_nn(&p));
        }

        #[test]
        fn total_mass_is_total_edge_length(p in cloud(3, 150)) {
            let m = NnGraph::new(p.clone()).measure();
            prop_assert!((m.total() - nn_total_length_brute(&p)).abs() < 1e-9);
            prop_assert!(m.weights.iter().all(|&w| w >= 0.0));
        }

        #[test]
        fn additive_over_disjoint_boxes(p in cloud(1, 100), cut in -30.0..30.0f64) {
            let m = NnGraph::new(p).measure();
            let left = Region::from_box(Aabb::new(&[-100.0], &[cut]).unwrap());
            let right = Region::from_box(Aabb::new(&[cut], &[100.0]).unwrap());
            prop_assert!((m.of(&left) + m.of(&right) - m.total()).abs() < 1e-9);
        }

        #[test]
        fn translation_invariant(p in cloud(2, 80), s in prop::collection::vec(-5.0..5.0f64, 2)) {
            let a = NnGraph::new(p.clone()).measure();
            let moved: Vec<Vec<f64>> = p.iter().map(|q| vec![q[0] + s[0], q[1] + s[1]]).collect();
            let b = NnGraph::new(moved).measure();
            for (x, y) in a.weights.iter().zip(&b.weights) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
