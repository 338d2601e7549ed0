use std::collections::HashSet;

use super::graph::NnGraph;
use crate::error::{Error, Result};
use crate::input::{Aabb, CellField, CellKey, Region};
use crate::limits::{check_boxes, to_f64_boxes, Mode, RescaledVectorSample};
use crate::parallel::{replicate_field, replicate_map};
use crate::scalar::{dist, Scalar};

/// Spatial projection of the field in `region`, in lexicographic order.
/// The spatial intensity is the field's `tau`.
pub fn spatial_sample<T: Scalar>(field: &CellField<T>, region: &Region<T>) -> Result<Vec<Vec<T>>> {
    let mut pts: Vec<Vec<T>> = field.sample_window(region)?.into_iter().map(|p| p.x.to_vec()).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(pts)
}

const FIRST_MARGIN: f64 = 16.0;
const MAX_MARGIN: f64 = 4096.0;

/// Exact check that the graph on the sample of `outer = w ⊕ m` gives every
/// point of `w` its weight under the whole process.
fn certified<T: Scalar>(g: &NnGraph<T>, w: &Aabb<T>, outer: &Aabb<T>, m: T) -> bool {
    for (i, p) in g.points.iter().enumerate() {
        let j = g.nn[i];
        let touches = w.contains(p) || j.is_some_and(|j| w.contains(&g.points[j]));
        if !touches {
            continue;
        }
        match j {
            Some(j) if dist(p, &g.points[j]) <= outer.boundary_distance(p) => {}
            _ => return false,
        }
    }
    // Points beyond `outer` cannot pick a neighbour in `w` if every small
    // cell meeting the shell around `w` is occupied.
    let d = w.dim();
    let s = m / T::lit(4.0 * (d as f64).sqrt());
    let occupied: HashSet<CellKey> = g
        .points
        .iter()
        .map(|p| p.iter().zip(&outer.lower).map(|(&c, &l)| ((c - l) / s).floor().to_i64().unwrap_or(-1)).collect())
        .collect();
    let half = m / T::lit(2.0);
    let lo: Vec<i64> = (0..d).map(|k| ((w.lower[k] - half - outer.lower[k]) / s).floor().to_i64().unwrap_or(0)).collect();
    let hi: Vec<i64> = (0..d).map(|k| ((w.upper[k] + half - outer.lower[k]) / s).floor().to_i64().unwrap_or(0)).collect();
    let mut ok = true;
    crate::input::for_each_in_range(&lo, &hi, |k| {
        if !ok {
            return;
        }
        let inside_w = (0..d).all(|a| {
            let a_lo = outer.lower[a] + s * T::lit(k[a] as f64);
            a_lo >= w.lower[a] && a_lo + s <= w.upper[a]
        });
        if !inside_w && !occupied.contains(k) {
            ok = false;
        }
    });
    ok
}

/// Measure of each box under the nearest-neighbour graph of the whole
/// (unbounded) process. The margin around each box doubles until the
/// local graph is certified exact.
pub fn nn_box_measures_infinite<T: Scalar>(field: &CellField<T>, boxes: &[Aabb<T>]) -> Result<Vec<f64>> {
    boxes
        .iter()
        .map(|w| {
            let mut m = T::lit(FIRST_MARGIN);
            loop {
                let outer = w.inflated(m).expect("positive margin");
                let g = NnGraph::new(spatial_sample(field, &Region::from_box(outer.clone()))?);
                if certified(&g, w, &outer, m) {
                    return Ok(g.measure().of(&Region::from_box(w.clone())));
                }
                m = m * T::lit(2.0);
                if m.as_f64() > MAX_MARGIN {
                    return Err(Error::Numerical("nearest-neighbour margin did not certify".into()));
                }
            }
        })
        .collect()
}

/// NN measure of each `lambda B_i` for one realisation.
pub fn nn_raw_measures<T: Scalar>(field: &CellField<T>, lambda: T, boxes: &[Aabb<T>], mode: &Mode<T>) -> Result<Vec<f64>> {
    check_boxes(field.dim(), boxes, mode)?;
    if !(lambda > T::zero()) {
        return Err(Error::Config("lambda must be positive".into()));
    }
    let scaled: Vec<Aabb<T>> = boxes.iter().map(|b| b.scaled(lambda)).collect();
    match mode {
        Mode::Infinite => nn_box_measures_infinite(field, &scaled),
        Mode::Finite(house) => {
            let pts = spatial_sample(field, &house.scaled(lambda))?;
            if pts.len() < 2 {
                return Ok(vec![0.0; boxes.len()]);
            }
            let m = NnGraph::new(pts).measure();
            Ok(scaled.into_iter().map(|b| m.of(&Region::from_box(b))).collect())
        }
    }
}

/// Replicate set of rescaled nearest-neighbour measures.
pub fn nn_rescaled_samples<T: Scalar>(
    base: &CellField<T>,
    lambda: T,
    boxes: &[Aabb<T>],
    mode: &Mode<T>,
    replicates: usize,
) -> Result<Vec<RescaledVectorSample>> {
    base.tau()?;
    if replicates == 0 {
        return Err(Error::Config("replicate count must be positive".into()));
    }
    check_boxes(base.dim(), boxes, mode)?;
    let rows = replicate_map(replicates, |i| {
        let f = replicate_field(base, i);
        Ok((f.master_seed(), nn_raw_measures(&f, lambda, boxes, mode)?))
    })?;
    RescaledVectorSample::from_rows(lambda.as_f64(), &to_f64_boxes(boxes)?, mode.label(), rows)
}
