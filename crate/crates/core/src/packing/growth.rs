//! Birth-growth nucleation: each accepted seed grows a ball of radius
//! `r0 + v (t - t_seed)`; later seeds landing inside a grown ball are lost.

use super::rsa::BallGrid;
use super::{PackedSample, Provenance, Rule};
use crate::error::{Error, Result};
use crate::input::{CellField, Region, SpaceTimePoint, Substrate};
use crate::scalar::Scalar;

/// Seed `i` is kept iff `|x_i - x_j| > r0 + v (t_i - t_j)` for every kept
/// earlier seed `j`. Input must be arrival-sorted.
pub fn grow_sequential<T: Scalar>(points: &[SpaceTimePoint<T>], speed: T, initial_radius: T) -> Result<Vec<bool>> {
    if !(speed >= T::zero()) || !(initial_radius >= T::zero()) {
        return Err(Error::Config("speed and initial radius must be nonnegative".into()));
    }
    if let Some(i) = points.windows(2).position(|w| w[0].arrival_cmp(&w[1]).is_gt()) {
        return Err(Error::Unsorted(i + 1));
    }
    let (Some(first), Some(last)) = (points.first(), points.last()) else {
        return Ok(Vec::new());
    };
    let reach = initial_radius + speed * (last.t - first.t);
    let side = if reach > T::zero() { reach } else { T::one() };
    let mut grid = BallGrid::new(side);
    Ok(points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let blocked = grid.any_near(&p.x, |j, d2| {
                let r = initial_radius + speed * (p.t - points[j].t);
                d2 <= r * r
            });
            if !blocked {
                grid.insert(i, &p.x);
            }
            !blocked
        })
        .collect())
}

pub fn simulate_birth_growth<T: Scalar>(field: &CellField<T>, region: &Region<T>, speed: T, initial_radius: T) -> Result<PackedSample<T>> {
    field.tau()?;
    if !(speed > T::zero()) {
        return Err(Error::Config("growth speed must be positive".into()));
    }
    let points = field.sample_window(region)?;
    let accepted = grow_sequential(&points, speed, initial_radius)?;
    Ok(PackedSample {
        points,
        accepted,
        rule: Rule::BirthGrowth { speed: speed.as_f64(), initial_radius: initial_radius.as_f64() },
        provenance: Some(Provenance { seed: field.master_seed(), region: region.clone(), substrate: Substrate::Continuum }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::Aabb;
    use crate::packing::pack_flags;

    fn p(x: f64, t: f64) -> SpaceTimePoint<f64> {
        SpaceTimePoint::new(&[x], t)
    }

    #[test]
    fn swallowed_seed() {
        assert_eq!(grow_sequential(&[p(0.0, 0.0), p(0.5, 0.8)], 1.0, 0.0).unwrap(), vec![true, false]);
    }

    #[test]
    fn all_kept() {
        let pts = vec![p(0.0, 0.0), p(5.0, 0.5), p(1.5, 1.0)];
        assert_eq!(grow_sequential(&pts, 1.0, 0.0).unwrap(), vec![true; 3]);
    }

    #[test]
    fn frozen_growth_is_adsorption() {
        // radius 2 = exclusion diameter; equality is measure-zero
        for s in 0..20 {
            let f = CellField::<f64>::continuum(s, 2, 1.0).unwrap();
            let pts = f.sample_window(&Region::from_box(Aabb::new(&[0.0, 0.0], &[12.0, 12.0]).unwrap())).unwrap();
            assert_eq!(grow_sequential(&pts, 1e-12, 2.0).unwrap(), pack_flags(&pts));
        }
    }

    #[test]
    fn grid_matches_quadratic_rule() {
        let f = CellField::<f64>::continuum(31, 1, 4.0).unwrap();
        let pts = f.sample_window(&Region::from_box(Aabb::new(&[0.0], &[60.0]).unwrap())).unwrap();
        let fast = grow_sequential(&pts, 0.7, 0.3).unwrap();
        let mut kept: Vec<usize> = Vec::new();
        for (i, q) in pts.iter().enumerate() {
            let ok = kept.iter().all(|&j| (q.x[0] - pts[j].x[0]).abs() > 0.3 + 0.7 * (q.t - pts[j].t));
            assert_eq!(ok, fast[i]);
            if ok {
                kept.push(i);
            }
        }
    }
}
