use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::input::{CellField, Region, SpaceTimePoint, Substrate};
use crate::packing::{pack_flags, pack_sequential, pack_window_infinite};
use crate::parallel::{replicate_field, replicate_map};
use crate::scalar::Scalar;
use crate::stats::{describe, linear_fit};

/// Symmetric difference between finite-volume packing on `lambda A` and
/// infinite-volume packing restricted to `lambda A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryOutcome {
    /// Accepted in the finite-volume packing only.
    pub plus: usize,
    /// Accepted in the infinite-volume packing only.
    pub minus: usize,
    pub plus_depths: Vec<f64>,
    pub minus_depths: Vec<f64>,
}

impl BoundaryOutcome {
    pub fn total(&self) -> usize {
        self.plus + self.minus
    }

    /// Splits paired flags over the same point list.
    pub fn from_flags<T: Scalar>(points: &[SpaceTimePoint<T>], finite: &[bool], infinite: &[bool], house: &Region<T>) -> Self {
        let mut out = BoundaryOutcome { plus: 0, minus: 0, plus_depths: Vec::new(), minus_depths: Vec::new() };
        for ((p, &f), &i) in points.iter().zip(finite).zip(infinite) {
            if f == i {
                continue;
            }
            let depth = house.boundary_distance(&p.x).as_f64();
            if f {
                out.plus += 1;
                out.plus_depths.push(depth);
            } else {
                out.minus += 1;
                out.minus_depths.push(depth);
            }
        }
        out
    }
}

/// Boundary processes for explicit inputs: `inside` is packed alone and
/// together with `outside` (both sorted by arrival). Used for fixtures.
pub fn boundary_split<T: Scalar>(inside: &[SpaceTimePoint<T>], outside: &[SpaceTimePoint<T>], house: &Region<T>) -> BoundaryOutcome {
    let finite = pack_flags(inside);
    let mut all: Vec<(bool, &SpaceTimePoint<T>)> = inside.iter().map(|p| (true, p)).chain(outside.iter().map(|p| (false, p))).collect();
    all.sort_by(|a, b| a.1.arrival_cmp(b.1));
    let ordered: Vec<SpaceTimePoint<T>> = all.iter().map(|(_, p)| (*p).clone()).collect();
    let flags = pack_flags(&ordered);
    let infinite: Vec<bool> = all.iter().zip(&flags).filter(|((ins, _), _)| *ins).map(|(_, &f)| f).collect();
    BoundaryOutcome::from_flags(inside, &finite, &infinite, house)
}

/// Couples both processes on one realisation of `field`.
pub fn boundary_processes<T: Scalar>(field: &CellField<T>, lambda: T, house: &Region<T>) -> Result<BoundaryOutcome> {
    field.tau()?;
    if field.substrate() != Substrate::Continuum {
        return Err(Error::Mode { expected: "continuum" });
    }
    if !(lambda > T::zero()) {
        return Err(Error::Config("lambda must be positive".into()));
    }
    let scaled = house.scaled(lambda);
    let finite = pack_sequential(field.sample_window(&scaled)?)?;
    let infinite = pack_window_infinite(field, &scaled)?;
    let by_tag: HashMap<u64, bool> = infinite.points.iter().zip(&infinite.accepted).map(|(p, &a)| (p.tag.expect("tagged"), a)).collect();
    let inf_flags: Vec<bool> = finite.points.iter().map(|p| by_tag[&p.tag.expect("tagged")]).collect();
    Ok(BoundaryOutcome::from_flags(&finite.points, &finite.accepted, &inf_flags, &scaled))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub log_lambda: Vec<f64>,
    pub log_values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl ScalingFit {
    pub fn fit(lambdas: &[f64], values: &[f64]) -> Result<Self> {
        if lambdas.len() < 3 {
            return Err(Error::InsufficientData(format!("{} grid points, need at least 3", lambdas.len())));
        }
        let log_lambda: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
        let log_values: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let f = linear_fit(&log_lambda, &log_values)?;
        Ok(ScalingFit { log_lambda, log_values, slope: f.slope, intercept: f.intercept, r_squared: f.r_squared })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub lambda: f64,
    pub mean_plus: f64,
    pub mean_minus: f64,
    /// Mean of `|pi+| + |pi-|`.
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    /// 99th percentile of the pooled depths.
    pub max_depth: f64,
    pub per_replicate: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryScaling {
    pub rows: Vec<BoundaryRow>,
    pub mean_fit: ScalingFit,
    pub variance_fit: ScalingFit,
    /// Lambdas left out of the fits because the counts vanished.
    pub dropped: Vec<f64>,
    /// Pooled depth histogram with unit-width bins: `(bin start, count)`.
    pub depth_histogram: Vec<(f64, usize)>,
}

fn geometric(l: &[f64]) -> bool {
    if l.windows(2).any(|w| !(w[1] > w[0])) {
        return false;
    }
    let q = l[1] / l[0];
    l.windows(2).all(|w| ((w[1] / w[0]) / q - 1.0).abs() < 1e-9)
}

/// Mean and variance of the boundary counts against `lambda`, on a
/// log-log scale. Replicate `i` of every lambda uses the same field.
pub fn boundary_scaling<T: Scalar>(base: &CellField<T>, lambdas: &[f64], house: &Region<T>, replicates: usize) -> Result<BoundaryScaling> {
    if lambdas.len() < 3 || !geometric(lambdas) {
        return Err(Error::Config("need at least three geometrically spaced lambdas".into()));
    }
    if replicates < 2 {
        return Err(Error::Config("need at least two replicates".into()));
    }
    let mut rows = Vec::new();
    let mut hist: Vec<usize> = Vec::new();
    for &l in lambdas {
        let outs = replicate_map(replicates, |i| boundary_processes(&replicate_field(base, i), T::lit(l), house))?;
        let totals: Vec<f64> = outs.iter().map(|o| o.total() as f64).collect();
        let m = describe(&totals)?;
        let n = replicates as f64;
        let mut depths: Vec<f64> = outs.iter().flat_map(|o| o.plus_depths.iter().chain(&o.minus_depths).copied()).collect();
        depths.sort_by(f64::total_cmp);
        for d in &depths {
            let b = d.floor() as usize;
            if hist.len() <= b {
                hist.resize(b + 1, 0);
            }
            hist[b] += 1;
        }
        rows.push(BoundaryRow {
            lambda: l,
            mean_plus: outs.iter().map(|o| o.plus as f64).sum::<f64>() / n,
            mean_minus: outs.iter().map(|o| o.minus as f64).sum::<f64>() / n,
            mean: m.mean,
            mean_se: m.sem(),
            variance: m.variance,
            max_depth: depths.get(((depths.len() as f64 * 0.99) as usize).min(depths.len().saturating_sub(1))).copied().unwrap_or(0.0),
            per_replicate: outs.iter().map(|o| (o.plus, o.minus)).collect(),
        });
    }
    let kept: Vec<&BoundaryRow> = rows.iter().filter(|r| r.mean > 0.0 && r.variance > 0.0).collect();
    let dropped: Vec<f64> = rows.iter().filter(|r| !(r.mean > 0.0 && r.variance > 0.0)).map(|r| r.lambda).collect();
    let ls: Vec<f64> = kept.iter().map(|r| r.lambda).collect();
    let mean_fit = ScalingFit::fit(&ls, &kept.iter().map(|r| r.mean).collect::<Vec<_>>())?;
    let variance_fit = ScalingFit::fit(&ls, &kept.iter().map(|r| r.variance).collect::<Vec<_>>())?;
    Ok(BoundaryScaling {
        rows,
        mean_fit,
        variance_fit,
        dropped,
        depth_histogram: hist.into_iter().enumerate().map(|(b, c)| (b as f64, c)).collect(),
    })
}
