use std::cmp::Ordering;

use smallvec::SmallVec;

use crate::scalar::{dist2, Scalar};

/// Spatial coordinates; inline storage up to three dimensions.
pub type Coord<T> = SmallVec<[T; 3]>;

/// A ball centre together with its arrival time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimePoint<T: Scalar> {
    pub x: Coord<T>,
    pub t: T,
    pub mark: Option<u32>,
    pub lifetime: Option<T>,
    /// Stable identity of a field point (cell and in-cell draw index).
    /// `None` for inserted test points.
    pub tag: Option<u64>,
}

impl<T: Scalar> SpaceTimePoint<T> {
    pub fn new(x: &[T], t: T) -> Self {
        SpaceTimePoint { x: Coord::from_slice(x), t, mark: None, lifetime: None, tag: None }
    }

    pub fn with_mark(mut self, mark: u32) -> Self {
        self.mark = Some(mark);
        self
    }

    pub fn with_lifetime(mut self, lifetime: T) -> Self {
        self.lifetime = Some(lifetime);
        self
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_valid(&self) -> bool {
        self.t >= T::zero() && self.t.is_finite() && self.x.iter().all(|c| c.is_finite()) && self.lifetime.is_none_or(|l| l > T::zero())
    }

    /// Arrival order: time first, then lexicographic coordinates.
    pub fn arrival_cmp(&self, other: &Self) -> Ordering {
        self.t.partial_cmp(&other.t).unwrap_or(Ordering::Equal).then_with(|| lex_cmp(&self.x, &other.x))
    }

    pub fn dist2(&self, other: &Self) -> T {
        dist2(&self.x, &other.x)
    }

    /// Same location and arrival time.
    pub fn coincides(&self, other: &Self) -> bool {
        self.t == other.t && self.x == other.x
    }
}

pub(crate) fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> Ordering {
    for (p, q) in a.iter().zip(b) {
        match p.partial_cmp(q) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}
