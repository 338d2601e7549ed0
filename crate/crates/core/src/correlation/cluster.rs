use serde::Serialize;

use super::estimate::{fit_decay, DecayFit, ProbabilityEstimate};
use crate::error::{Error, Result};
use crate::input::{CellField, SpaceTimePoint};
use crate::packing::sigma_with_backward_tags;
use crate::parallel::{replicate_field, replicate_map};
use crate::scalar::Scalar;

/// Constant in the bound `gap <= K sqrt(P[cones meet])` checked per row.
pub const CLUSTER_BOUND_CONSTANT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRow {
    pub separation: f64,
    pub rbar_kl: f64,
    pub rbar_k: f64,
    pub rbar_l: f64,
    /// `|rbar_kl - rbar_k rbar_l|`.
    pub gap: f64,
    pub gap_se: f64,
    /// Frequency with which the backward cones of the two tuples share an
    /// input point.
    pub cones_meet: ProbabilityEstimate,
    /// `gap <= K sqrt(P) + 3 SE`.
    pub bound_holds: bool,
    /// Gap within two standard errors of zero.
    pub below_noise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringReport {
    pub rows: Vec<GapRow>,
    pub gap_fit: Option<DecayFit>,
    pub cones_fit: Option<DecayFit>,
    pub bound_constant: f64,
}

fn intersects(a: &[u64], b: &[u64]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Decay of `|rbar_{k+l} - rbar_k rbar_l|` as the second tuple is moved
/// along the first axis by each separation. All separations of one sample
/// reuse the same input, so the rows are positively coupled. Test points
/// are inserted jointly.
pub fn clustering_gap<T: Scalar>(
    k_tuple: &[SpaceTimePoint<T>],
    l_tuple: &[SpaceTimePoint<T>],
    separations: &[f64],
    base: &CellField<T>,
    n_samples: usize,
) -> Result<ClusteringReport> {
    base.tau()?;
    if !(1..=2).contains(&k_tuple.len()) || !(1..=2).contains(&l_tuple.len()) {
        return Err(Error::Config("tuples must hold one or two points".into()));
    }
    if n_samples < 2 || separations.is_empty() {
        return Err(Error::Config("need at least two samples and one separation".into()));
    }
    let shifted: Vec<Vec<SpaceTimePoint<T>>> = separations
        .iter()
        .map(|&s| {
            l_tuple
                .iter()
                .map(|w| {
                    let mut v = w.clone();
                    v.x[0] = v.x[0] + T::lit(s);
                    v
                })
                .collect()
        })
        .collect();
    // per sample: sigma_k, then (sigma_l, sigma_kl, cones meet) per separation
    let runs = replicate_map(n_samples, |i| {
        let f = replicate_field(base, i);
        let (fk, tk) = sigma_with_backward_tags(k_tuple, &f)?;
        let sk = fk.iter().all(|&a| a);
        let mut rows = Vec::with_capacity(shifted.len());
        for l in &shifted {
            let (fl, tl) = sigma_with_backward_tags(l, &f)?;
            let both: Vec<_> = k_tuple.iter().chain(l).cloned().collect();
            let skl = if both.iter().enumerate().any(|(a, p)| both[..a].iter().any(|q| q.coincides(p))) {
                false
            } else {
                sigma_with_backward_tags(&both, &f)?.0.iter().all(|&a| a)
            };
            rows.push((fl.iter().all(|&a| a), skl, intersects(&tk, &tl)));
        }
        Ok((sk, rows))
    })?;
    let n = n_samples as f64;
    let ind = |b: bool| if b { 1.0 } else { 0.0 };
    let mk = runs.iter().map(|r| ind(r.0)).sum::<f64>() / n;
    let mut rows = Vec::with_capacity(separations.len());
    for (j, &sep) in separations.iter().enumerate() {
        let ml = runs.iter().map(|r| ind(r.1[j].0)).sum::<f64>() / n;
        let mkl = runs.iter().map(|r| ind(r.1[j].1)).sum::<f64>() / n;
        let gap = mkl - mk * ml;
        // delta method: influence values of the covariance-type statistic
        let u: Vec<f64> = runs.iter().map(|r| ind(r.1[j].1) - ml * ind(r.0) - mk * ind(r.1[j].0)).collect();
        let mu = u.iter().sum::<f64>() / n;
        let gap_se = (u.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let cones_meet = ProbabilityEstimate::from_indicators(runs.iter().map(|r| r.1[j].2))?;
        rows.push(GapRow {
            separation: sep,
            rbar_kl: mkl,
            rbar_k: mk,
            rbar_l: ml,
            gap: gap.abs(),
            gap_se,
            cones_meet,
            bound_holds: gap.abs() <= CLUSTER_BOUND_CONSTANT * cones_meet.value.sqrt() + 3.0 * gap_se,
            below_noise: gap.abs() < 2.0 * gap_se,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.separation).collect();
    let gap_fit = fit_decay(&x, &rows.iter().map(|r| r.gap).collect::<Vec<_>>(), &rows.iter().map(|r| r.gap_se).collect::<Vec<_>>()).ok();
    let cones_fit = fit_decay(
        &x,
        &rows.iter().map(|r| r.cones_meet.value).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.cones_meet.standard_error).collect::<Vec<_>>(),
    )
    .ok();
    Ok(ClusteringReport { rows, gap_fit, cones_fit, bound_constant: CLUSTER_BOUND_CONSTANT })
}
