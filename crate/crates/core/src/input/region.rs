use serde::{Deserialize, Serialize};

use super::point::Coord;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Half-open axis-aligned box `[lower, upper)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aabb<T: Scalar> {
    pub lower: Coord<T>,
    pub upper: Coord<T>,
}

impl<T: Scalar> Aabb<T> {
    pub fn new(lower: &[T], upper: &[T]) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Config(format!("box corners have dimensions {} and {}", lower.len(), upper.len())));
        }
        if lower.iter().zip(upper).any(|(l, u)| !(u > l) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::Config("box side lengths must be positive and finite".into()));
        }
        Ok(Aabb { lower: Coord::from_slice(lower), upper: Coord::from_slice(upper) })
    }

    /// Cube `[c - h, c + h)^d`.
    pub fn cube(center: &[T], half_width: T) -> Result<Self> {
        let lo: Vec<T> = center.iter().map(|&c| c - half_width).collect();
        let hi: Vec<T> = center.iter().map(|&c| c + half_width).collect();
        Self::new(&lo, &hi)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> T {
        self.lower.iter().zip(&self.upper).fold(T::one(), |v, (&l, &u)| v * (u - l))
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&c, (&l, &u))| c >= l && c < u)
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let mut lo = Coord::new();
        let mut hi = Coord::new();
        for i in 0..self.dim() {
            let l = self.lower[i].max(other.lower[i]);
            let u = self.upper[i].min(other.upper[i]);
            if !(u > l) {
                return None;
            }
            lo.push(l);
            hi.push(u);
        }
        Some(Aabb { lower: lo, upper: hi })
    }

    pub fn scaled(&self, factor: T) -> Self {
        Aabb { lower: self.lower.iter().map(|&c| c * factor).collect(), upper: self.upper.iter().map(|&c| c * factor).collect() }
    }

    pub fn translated(&self, offset: &[T]) -> Self {
        Aabb {
            lower: self.lower.iter().zip(offset).map(|(&c, &o)| c + o).collect(),
            upper: self.upper.iter().zip(offset).map(|(&c, &o)| c + o).collect(),
        }
    }

    /// Grows (positive `by`) or shrinks the box on every side. `None` when
    /// shrinking leaves nothing.
    pub fn inflated(&self, by: T) -> Option<Self> {
        let lo: Coord<T> = self.lower.iter().map(|&c| c - by).collect();
        let hi: Coord<T> = self.upper.iter().map(|&c| c + by).collect();
        if lo.iter().zip(&hi).all(|(l, u)| u > l) {
            Some(Aabb { lower: lo, upper: hi })
        } else {
            None
        }
    }

    /// Euclidean distance from `x` to the box boundary (inside or outside).
    pub fn boundary_distance(&self, x: &[T]) -> T {
        if self.contains(x) {
            x.iter().zip(self.lower.iter().zip(&self.upper)).map(|(&c, (&l, &u))| (c - l).min(u - c)).fold(T::infinity(), T::min)
        } else {
            self.outside_distance(x)
        }
    }

    fn outside_distance(&self, x: &[T]) -> T {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&c, (&l, &u))| {
                let d = if c < l {
                    l - c
                } else if c > u {
                    c - u
                } else {
                    T::zero()
                };
                d * d
            })
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }
}

/// Finite union of axis-aligned boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region<T: Scalar> {
    boxes: Vec<Aabb<T>>,
}

impl<T: Scalar> Region<T> {
    pub fn new(boxes: Vec<Aabb<T>>) -> Result<Self> {
        if let Some(first) = boxes.first() {
            let d = first.dim();
            if let Some(b) = boxes.iter().find(|b| b.dim() != d) {
                return Err(Error::Dimension { expected: d, got: b.dim() });
            }
        }
        Ok(Region { boxes })
    }

    pub fn from_box(b: Aabb<T>) -> Self {
        Region { boxes: vec![b] }
    }

    pub fn empty() -> Self {
        Region { boxes: Vec::new() }
    }

    pub fn boxes(&self) -> &[Aabb<T>] {
        &self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.boxes.first().map(Aabb::dim)
    }

    /// The single box of a one-box region.
    pub fn as_box(&self) -> Option<&Aabb<T>> {
        match self.boxes.as_slice() {
            [b] => Some(b),
            _ => None,
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.boxes.iter().any(|b| b.contains(x))
    }

    /// Exact union volume by inclusion–exclusion over the box list. Empty
    /// intersections prune their whole subtree, so mostly-disjoint families
    /// stay cheap.
    pub fn volume(&self) -> T {
        fn rec<T: Scalar>(boxes: &[Aabb<T>], start: usize, acc: &Aabb<T>, sign: T, total: &mut T) {
            for j in start..boxes.len() {
                if let Some(next) = acc.intersect(&boxes[j]) {
                    *total = *total - sign * next.volume();
                    rec(boxes, j + 1, &next, -sign, total);
                }
            }
        }
        let mut total = T::zero();
        for (i, b) in self.boxes.iter().enumerate() {
            total = total + b.volume();
            rec(&self.boxes, i + 1, b, T::one(), &mut total);
        }
        total
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let boxes = self.boxes.iter().flat_map(|a| other.boxes.iter().filter_map(move |b| a.intersect(b))).collect();
        Region { boxes }
    }

    pub fn scaled(&self, factor: T) -> Self {
        Region { boxes: self.boxes.iter().map(|b| b.scaled(factor)).collect() }
    }

    pub fn bounding_box(&self) -> Option<Aabb<T>> {
        let first = self.boxes.first()?;
        let mut lo = first.lower.clone();
        let mut hi = first.upper.clone();
        for b in &self.boxes[1..] {
            for i in 0..lo.len() {
                lo[i] = lo[i].min(b.lower[i]);
                hi[i] = hi[i].max(b.upper[i]);
            }
        }
        Some(Aabb { lower: lo, upper: hi })
    }

    /// Distance from `x` to the region boundary. Exact for single boxes and
    /// for points outside the region; for interior points of a multi-box
    /// union it is the deepest in-box depth, a lower bound.
    pub fn boundary_distance(&self, x: &[T]) -> T {
        if self.contains(x) {
            self.boxes.iter().filter(|b| b.contains(x)).map(|b| b.boundary_distance(x)).fold(T::zero(), T::max)
        } else {
            self.boxes.iter().map(|b| b.boundary_distance(x)).fold(T::infinity(), T::min)
        }
    }
}
