use serde::{Deserialize, Serialize};

use super::graph::{brute_force_nn, closer};
use super::rescaled::spatial_sample;
use crate::correlation::{fit_decay, DecayFit, ProbabilityEstimate};
use crate::error::{Error, Result};
use crate::input::{Aabb, CellField, Region};
use crate::parallel::{replicate_field, replicate_map};
use crate::scalar::{dist2, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    /// Candidate radii are `r_step, 2 r_step, ..., r_cap`.
    pub r_step: f64,
    pub r_cap: f64,
    /// Spacing of the adversarial points along each ray.
    pub y_step: f64,
    /// Extra sampled distance beyond `r_cap` for the configuration check.
    pub pad: f64,
    pub t_grid: Vec<f64>,
    pub n_probes: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { r_step: 0.25, r_cap: 12.0, y_step: 0.25, pad: 10.0, t_grid: (2..=8).map(f64::from).collect(), n_probes: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizationReport {
    /// Per probe radius; infinite when no candidate up to the cap worked.
    pub radii: Vec<f64>,
    pub censored: usize,
    /// `(t, P[R > t])`.
    pub tail: Vec<(f64, ProbabilityEstimate)>,
    pub fit: Option<DecayFit>,
    pub config: ProbeConfig,
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum()
}

/// Unit directions towards the `3^d - 1` neighbours of a cube.
fn rays(d: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    crate::input::for_each_in_range(&vec![-1; d], &vec![1; d], |k| {
        if k.iter().any(|&c| c != 0) {
            let n = (k.iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt();
            out.push(k.iter().map(|&c| c as f64 / n).collect());
        }
    });
    out
}

/// Weight of the origin (index 0) in the NN graph of `pts`, optionally
/// with one more point `y`, reusing the nearest neighbours `nn` of `pts`.
fn origin_weight(pts: &[Vec<f64>], nn: &[Option<usize>], y: Option<&[f64]>) -> f64 {
    let o = &pts[0];
    let mut linked: Vec<(f64, bool)> = Vec::new(); // (length, is y)
                                                   // neighbour of the origin
    let mut best = nn[0].map(|j| (dist2(o, &pts[j]), j));
    let mut origin_to_y = false;
    if let Some(y) = y {
        let dy = norm2(y);
        if best.is_none_or(|(bd, b)| closer(dy, y, bd, &pts[b])) {
            origin_to_y = true;
        }
    }
    if origin_to_y {
        linked.push((norm2(y.unwrap()).sqrt(), true));
        best = None;
    }
    for i in 1..pts.len() {
        let to_origin = nn[i] == Some(0) && y.is_none_or(|y| !closer(dist2(&pts[i], y), y, norm2(&pts[i]), o));
        if to_origin || best.is_some_and(|(_, b)| b == i) {
            linked.push((norm2(&pts[i]).sqrt(), false));
        }
    }
    if let Some(y) = y {
        if !origin_to_y {
            let dy = norm2(y);
            let mut to_origin = true;
            for p in &pts[1..] {
                if closer(dist2(y, p), p, dy, o) {
                    to_origin = false;
                    break;
                }
            }
            if to_origin {
                linked.push((dy.sqrt(), true));
            }
        }
    }
    linked.iter().map(|l| l.0).sum::<f64>() / 2.0
}

/// Stabilisation radius of the origin's weight for the configuration
/// `others` (origin excluded): the smallest candidate `R` such that the
/// weight computed from the points in the closed ball `B_R` is unchanged by
/// adding any single adversarial point outside `B_R`, or by adding all of
/// `others`. `None` when no candidate up to the cap works.
pub fn probe_radius(others: &[Vec<f64>], cfg: &ProbeConfig) -> Option<f64> {
    let d = others.first().map_or(1, Vec::len);
    let dirs = rays(d);
    let mut sorted: Vec<(f64, &Vec<f64>)> = others.iter().map(|p| (norm2(p), p)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut full = vec![vec![0.0; d]];
    full.extend(sorted.iter().map(|p| p.1.clone()));
    let full_weight = origin_weight(&full, &brute_force_nn(&full), None);
    let steps = (cfg.r_cap / cfg.r_step).floor() as usize;
    'radius: for k in 1..=steps {
        let r = cfg.r_step * k as f64;
        let inside = 1 + sorted.iter().take_while(|p| p.0 <= r * r).count();
        let base = &full[..inside];
        let nn = brute_force_nn(base);
        let w0 = origin_weight(base, &nn, None);
        let same = |w: f64| (w - w0).abs() <= 1e-12 * (1.0 + w0.abs());
        if !same(full_weight) {
            continue;
        }
        let mut rho = r + cfg.y_step;
        while rho <= 2.0 * r + 4.0 {
            for u in &dirs {
                let y: Vec<f64> = u.iter().map(|c| c * rho).collect();
                if !same(origin_weight(base, &nn, Some(&y))) {
                    continue 'radius;
                }
            }
            rho += cfg.y_step;
        }
        return Some(r);
    }
    None
}

/// Per-probe stabilisation radii of the nearest-neighbour weight at a point
/// inserted at the origin of each replicate's spatial sample.
pub fn stabilization_radius<T: Scalar>(base: &CellField<T>, cfg: &ProbeConfig) -> Result<StabilizationReport> {
    base.tau()?;
    if !(cfg.r_step > 0.0 && cfg.y_step > 0.0 && cfg.r_cap >= cfg.r_step && cfg.pad >= 0.0) || cfg.n_probes < 2 {
        return Err(Error::Config("invalid probe configuration".into()));
    }
    let d = base.dim();
    let half = T::lit(cfg.r_cap + cfg.pad);
    let window = Region::from_box(Aabb::cube(&vec![T::zero(); d], half)?);
    let radii = replicate_map(cfg.n_probes, |i| {
        let f = replicate_field(base, i);
        let pts: Vec<Vec<f64>> = spatial_sample(&f, &window)?.into_iter().map(|p| p.iter().map(|c| c.as_f64()).collect()).collect();
        Ok(probe_radius(&pts, cfg).unwrap_or(f64::INFINITY))
    })?;
    let tail = cfg
        .t_grid
        .iter()
        .map(|&t| Ok((t, ProbabilityEstimate::from_indicators(radii.iter().map(|&r| r > t))?)))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_decay(
        &tail.iter().map(|r| r.0).collect::<Vec<_>>(),
        &tail.iter().map(|r| r.1.value).collect::<Vec<_>>(),
        &tail.iter().map(|r| r.1.standard_error).collect::<Vec<_>>(),
    )
    .ok();
    Ok(StabilizationReport { censored: radii.iter().filter(|r| r.is_infinite()).count(), radii, tail, fit, config: cfg.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::NnGraph;

    fn pts(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn origin_weight_matches_the_graph() {
        let base = pts(&[0.0, 1.0, -1.2, 1.5, 3.0]);
        let nn = brute_force_nn(&base);
        let w = NnGraph::new(base.clone()).measure().weights[0];
        assert!((origin_weight(&base, &nn, None) - w).abs() < 1e-12);
        for y in [-0.5, -1.1, -1.5, -5.0, 0.7, 2.0, 9.0] {
            let mut with = base.clone();
            with.push(vec![y]);
            let want = NnGraph::new(with).measure().weights[0];
            assert!((origin_weight(&base, &nn, Some(&[y])) - want).abs() < 1e-12, "y = {y}");
        }
    }

    #[test]
    fn neighbour_at_unit_distance() {
        // the neighbours of the origin have closer neighbours of their own
        let r = probe_radius(&pts(&[1.0, 1.5, -1.2, -1.6]), &ProbeConfig::default()).unwrap();
        assert!(r <= 2.0, "{r}");
        assert!(r >= 1.6);
    }

    #[test]
    fn empty_neighbourhood_is_censored() {
        assert_eq!(probe_radius(&pts(&[50.0]), &ProbeConfig::default()), None);
    }

    #[test]
    fn radii_are_deterministic_and_mostly_small() {
        let f = CellField::<f64>::continuum(3, 1, 1.0).unwrap();
        let cfg = ProbeConfig { n_probes: 200, ..ProbeConfig::default() };
        let a = stabilization_radius(&f, &cfg).unwrap();
        let b = stabilization_radius(&f, &cfg).unwrap();
        assert_eq!(a.radii, b.radii);
        assert!(a.tail.windows(2).all(|w| w[1].1.value <= w[0].1.value));
        assert!(a.tail[0].1.value < 0.9);
    }

    #[test]
    fn ray_count() {
        assert_eq!(rays(1).len(), 2);
        assert_eq!(rays(2).len(), 8);
        assert_eq!(rays(3).len(), 26);
    }
}
