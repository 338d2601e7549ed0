use serde::Serialize;

use crate::error::{Error, Result};
use crate::input::{Aabb, CellField, Region, Substrate};
use crate::packing::{jam_lattice_window, pack_sequential, pack_window_infinite};
use crate::parallel::{replicate_field, replicate_map};
use crate::scalar::Scalar;

/// Which process the counts come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Mode<T: Scalar> {
    /// Infinite-volume packing restricted to each box.
    Infinite,
    /// Packing of the input on the house `lambda A` only.
    Finite(Region<T>),
}

impl<T: Scalar> Mode<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Infinite => "infinite",
            Mode::Finite(_) => "finite",
        }
    }
}

/// One replicate of the centred, `lambda^{d/2}`-scaled box measures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescaledVectorSample {
    pub lambda: f64,
    /// Unscaled boxes `B_i`.
    pub boxes: Vec<Aabb<f64>>,
    pub raw: Vec<f64>,
    /// Pooled mean of `raw` over the replicate set, per box.
    pub mean_estimate: Vec<f64>,
    /// `(raw - mean_estimate) / lambda^{d/2}`.
    pub centered_scaled: Vec<f64>,
    pub mode: &'static str,
    pub replicate: usize,
    pub replicate_seed: u64,
}

impl RescaledVectorSample {
    /// Centres a replicate set on its pooled means. `rows` holds
    /// `(replicate seed, raw values)` in replicate order.
    pub fn from_rows(lambda: f64, boxes: &[Aabb<f64>], mode: &'static str, rows: Vec<(u64, Vec<f64>)>) -> Result<Vec<Self>> {
        let Some(first) = rows.first() else {
            return Err(Error::Config("replicate count must be positive".into()));
        };
        let k = first.1.len();
        let d = boxes.first().map_or(1, Aabb::dim);
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..k).map(|j| rows.iter().map(|r| r.1[j]).sum::<f64>() / n).collect();
        let scale = lambda.powf(d as f64 / 2.0);
        Ok(rows
            .into_iter()
            .enumerate()
            .map(|(i, (seed, raw))| RescaledVectorSample {
                lambda,
                boxes: boxes.to_vec(),
                centered_scaled: raw.iter().zip(&mean).map(|(r, m)| (r - m) / scale).collect(),
                raw,
                mean_estimate: mean.clone(),
                mode,
                replicate: i,
                replicate_seed: seed,
            })
            .collect())
    }
}

pub(crate) fn check_boxes<T: Scalar>(dim: usize, boxes: &[Aabb<T>], mode: &Mode<T>) -> Result<()> {
    if boxes.is_empty() {
        return Err(Error::Config("no boxes".into()));
    }
    if let Some(b) = boxes.iter().find(|b| b.dim() != dim) {
        return Err(Error::Dimension { expected: dim, got: b.dim() });
    }
    if let Mode::Finite(house) = mode {
        for (i, b) in boxes.iter().enumerate() {
            let inside = house.intersection(&Region::from_box(b.clone())).volume();
            let tol = T::lit(1e-9) * b.volume();
            if (inside - b.volume()).abs() > tol {
                return Err(Error::Config(format!("box {i} is not inside the house")));
            }
        }
    }
    Ok(())
}

/// Accepted points of one realisation in each `lambda B_i`.
pub fn raw_counts<T: Scalar>(field: &CellField<T>, lambda: T, boxes: &[Aabb<T>], mode: &Mode<T>) -> Result<Vec<f64>> {
    check_boxes(field.dim(), boxes, mode)?;
    if !(lambda > T::zero()) {
        return Err(Error::Config("lambda must be positive".into()));
    }
    let scaled: Vec<Aabb<T>> = boxes.iter().map(|b| b.scaled(lambda)).collect();
    let union = Region::new(scaled.clone())?;
    let points: Vec<Vec<T>> = match (field.substrate(), mode) {
        (Substrate::Continuum, Mode::Infinite) => pack_window_infinite(field, &union)?.accepted_points().map(|p| p.x.to_vec()).collect(),
        (Substrate::Continuum, Mode::Finite(house)) => {
            let s = pack_sequential(field.sample_window(&house.scaled(lambda))?)?;
            s.accepted_points().map(|p| p.x.to_vec()).collect()
        }
        (Substrate::Lattice, m) => {
            let house = match m {
                Mode::Finite(h) => Some(h.scaled(lambda)),
                Mode::Infinite => None,
            };
            jam_lattice_window(field, &union, house.as_ref())?.into_iter().map(|s| s.iter().map(|&c| T::lit(c as f64)).collect()).collect()
        }
    };
    Ok(scaled.iter().map(|b| points.iter().filter(|x| b.contains(x)).count() as f64).collect())
}

/// Replicate set of rescaled count vectors. Replicate `i` uses the
/// `i`-th replicate field of `base`, so different modes and lambdas are
/// coupled through common input.
pub fn rescaled_samples<T: Scalar>(
    base: &CellField<T>,
    lambda: T,
    boxes: &[Aabb<T>],
    mode: &Mode<T>,
    replicates: usize,
) -> Result<Vec<RescaledVectorSample>> {
    if replicates == 0 {
        return Err(Error::Config("replicate count must be positive".into()));
    }
    check_boxes(base.dim(), boxes, mode)?;
    let rows = replicate_map(replicates, |i| {
        let f = replicate_field(base, i);
        Ok((f.master_seed(), raw_counts(&f, lambda, boxes, mode)?))
    })?;
    let boxes64 = to_f64_boxes(boxes)?;
    RescaledVectorSample::from_rows(lambda.as_f64(), &boxes64, mode.label(), rows)
}

pub(crate) fn to_f64_boxes<T: Scalar>(boxes: &[Aabb<T>]) -> Result<Vec<Aabb<f64>>> {
    boxes
        .iter()
        .map(|b| {
            let lo: Vec<f64> = b.lower.iter().map(|c| c.as_f64()).collect();
            let hi: Vec<f64> = b.upper.iter().map(|c| c.as_f64()).collect();
            Aabb::new(&lo, &hi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{covariance, covariance_se};

    fn b1(lo: f64, hi: f64) -> Aabb<f64> {
        Aabb::new(&[lo], &[hi]).unwrap()
    }

    #[test]
    fn empty_realisation_centres_to_minus_mean() {
        let rows = vec![(1, vec![0.0]), (2, vec![6.0]), (3, vec![3.0])];
        let s = RescaledVectorSample::from_rows(4.0, &[b1(0.0, 1.0)], "infinite", rows).unwrap();
        assert_eq!(s[0].centered_scaled[0], -3.0 / 2.0);
        assert_eq!(s[1].mean_estimate, vec![3.0]);
    }

    #[test]
    fn finite_and_infinite_agree_deep_inside_the_house() {
        let f = CellField::<f64>::continuum(5, 1, 1.0).unwrap();
        let house = Region::from_box(b1(-3.0, 4.0));
        let boxes = [b1(0.0, 1.0)];
        for i in 0..10 {
            let g = replicate_field(&f, i);
            let a = raw_counts(&g, 16.0, &boxes, &Mode::Infinite).unwrap();
            let b = raw_counts(&g, 16.0, &boxes, &Mode::Finite(house.clone())).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn boxes_outside_the_house_are_rejected() {
        let f = CellField::<f64>::continuum(5, 1, 1.0).unwrap();
        let r = raw_counts(&f, 2.0, &[b1(0.0, 2.0)], &Mode::Finite(Region::from_box(b1(0.0, 1.0))));
        assert!(matches!(r, Err(Error::Config(_))));
        assert!(rescaled_samples(&f, 2.0, &[b1(0.0, 1.0)], &Mode::Infinite, 0).is_err());
    }

    #[test]
    fn distant_boxes_are_uncorrelated() {
        let f = CellField::<f64>::continuum(6, 1, 1.0).unwrap();
        let s = rescaled_samples(&f, 8.0, &[b1(0.0, 1.0), b1(5.0, 6.0)], &Mode::Infinite, 1000).unwrap();
        let a: Vec<f64> = s.iter().map(|v| v.centered_scaled[0]).collect();
        let b: Vec<f64> = s.iter().map(|v| v.centered_scaled[1]).collect();
        assert!(covariance(&a, &b).abs() < 3.0 * covariance_se(&a, &b));
    }

    #[test]
    fn lattice_counts() {
        let f = CellField::<f64>::lattice(2, 1).unwrap();
        let c = raw_counts(&f, 10.0, &[b1(0.0, 1.0)], &Mode::Infinite).unwrap();
        // hard core on ten sites: between 4 and 5 occupied (maximal, spacing 2 or 3)
        assert!((3.0..=5.0).contains(&c[0]), "{c:?}");
        let fin = raw_counts(&f, 10.0, &[b1(0.0, 1.0)], &Mode::Finite(Region::from_box(b1(0.0, 1.0)))).unwrap();
        assert!((4.0..=5.0).contains(&fin[0]));
    }
}
