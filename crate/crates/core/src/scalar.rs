//! Floating point abstraction for the geometric core.
//!
//! Geometry, packing and nearest-neighbour code is written against
//! [`Scalar`] so it runs in `f32` or `f64`. Statistical estimators work in
//! `f64` throughout.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast};

/// floating point: f32 or f64
pub trait Scalar: Float + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal or sample.
    fn lit(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("f64 is representable in every Scalar")
    }

    fn as_f64(self) -> f64 {
        <f64 as NumCast>::from(self).expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Interaction diameter of the unit-radius balls.
pub fn diameter<T: Scalar>() -> T {
    T::lit(2.0)
}

/// Squared Euclidean distance; panics on dimension mismatch in debug builds.
#[inline]
pub fn dist2<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&p, &q)| acc + (p - q) * (p - q))
}

#[inline]
pub fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    dist2(a, b).sqrt()
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    std::f64::consts::PI.powf(half) / statrs::function::gamma::gamma(half + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn distances_in_both_precisions() {
        assert_eq!(dist(&[0.0f64, 0.0], &[3.0, 4.0]), 5.0);
        assert_eq!(dist(&[0.0f32, 0.0], &[3.0, 4.0]), 5.0);
    }
}
