use std::collections::HashMap;

use serde::Serialize;
use statrs::function::gamma::{gamma, gamma_ur};

use super::estimate::{fit_decay, DecayFit};
use crate::error::{Error, Result};
use crate::input::{Aabb, Region};
use crate::packing::PackedSample;
use crate::scalar::{dist2, unit_ball_volume, Scalar};
use crate::stats::{describe, variance_se};

/// Radial pair-correlation estimates of the accepted point process.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedCorrelation {
    pub dim: usize,
    pub bin_edges: Vec<f64>,
    pub estimates: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Ordered pairs counted per bin, summed over samples.
    pub pair_counts: Vec<u64>,
    /// Bins whose eroded reference window is empty (estimate left at 0).
    pub empty: Vec<bool>,
    /// Accepted points per unit volume.
    pub intensity: f64,
    pub intensity_se: f64,
    pub n_samples: usize,
    #[serde(skip)]
    per_sample: Vec<(f64, Vec<f64>)>,
}

impl BinnedCorrelation {
    pub fn shell_volume(&self, b: usize) -> f64 {
        unit_ball_volume(self.dim) * (self.bin_edges[b + 1].powi(self.dim as i32) - self.bin_edges[b].powi(self.dim as i32))
    }

    pub fn bin_mid(&self, b: usize) -> f64 {
        0.5 * (self.bin_edges[b] + self.bin_edges[b + 1])
    }

    /// Intensity of each input sample.
    pub fn sample_intensities(&self) -> Vec<f64> {
        self.per_sample.iter().map(|s| s.0).collect()
    }
}

fn f64s<T: Scalar>(x: &[T]) -> Vec<f64> {
    x.iter().map(|c| c.as_f64()).collect()
}

/// Minus-sampling pair-correlation estimator over a common box window.
///
/// A pair `(x, y)` at distance `s` in bin `[lo, hi)` counts only when the
/// reference point `x` lies at least `hi` inside the window, and the bin
/// total is divided by the volume of that eroded window and the shell
/// volume. Samples should come from infinite-volume packing so the window
/// has no edge effects of its own.
pub fn spatial_pair_correlation<T: Scalar>(samples: &[PackedSample<T>], window: &Aabb<T>, bin_edges: &[f64]) -> Result<BinnedCorrelation> {
    if bin_edges.len() < 2 || bin_edges[0] < 0.0 || bin_edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("bin edges must be nonnegative and strictly ascending".into()));
    }
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples".into()));
    }
    let d = window.dim();
    let nb = bin_edges.len() - 1;
    let smax = bin_edges[nb];
    let lo = f64s(&window.lower);
    let hi = f64s(&window.upper);
    let wvol = window.volume().as_f64();
    // eroded reference volume per bin
    let ref_vol: Vec<f64> = bin_edges[1..].iter().map(|&h| lo.iter().zip(&hi).map(|(a, b)| (b - a - 2.0 * h).max(0.0)).product()).collect();
    let shell: Vec<f64> = (0..nb).map(|b| unit_ball_volume(d) * (bin_edges[b + 1].powi(d as i32) - bin_edges[b].powi(d as i32))).collect();
    let mut counts = vec![0u64; nb];
    let mut per_sample = Vec::with_capacity(samples.len());
    for s in samples {
        let pts: Vec<Vec<f64>> = s.accepted_points().filter(|p| window.contains(&p.x)).map(|p| f64s(&p.x)).collect();
        if pts.iter().any(|p| p.len() != d) {
            return Err(Error::Dimension { expected: d, got: pts.iter().find(|p| p.len() != d).map_or(0, |p| p.len()) });
        }
        let side = smax.max(1e-9);
        let key = |x: &[f64]| -> Vec<i64> { x.iter().map(|c| (c / side).floor() as i64).collect() };
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in pts.iter().enumerate() {
            cells.entry(key(p)).or_default().push(i);
        }
        let mut local = vec![0u64; nb];
        for (i, x) in pts.iter().enumerate() {
            let depth = lo.iter().zip(&hi).zip(x).map(|((a, b), c)| (c - a).min(b - c)).fold(f64::INFINITY, f64::min);
            if depth < bin_edges[1] {
                continue;
            }
            crate::packing::visit_neighbour_keys(&key(x), |k| {
                if let Some(ids) = cells.get(k.as_slice()) {
                    for &j in ids {
                        if j == i {
                            continue;
                        }
                        let r = dist2(x, &pts[j]).sqrt();
                        if r >= smax || r < bin_edges[0] {
                            continue;
                        }
                        let b = bin_edges.partition_point(|&e| e <= r) - 1;
                        if depth >= bin_edges[b + 1] {
                            local[b] += 1;
                        }
                    }
                }
            });
        }
        let est: Vec<f64> = (0..nb).map(|b| if ref_vol[b] > 0.0 { local[b] as f64 / (ref_vol[b] * shell[b]) } else { 0.0 }).collect();
        for b in 0..nb {
            counts[b] += local[b];
        }
        per_sample.push((pts.len() as f64 / wvol, est));
    }
    let n = samples.len();
    let spread = |v: Vec<f64>| -> (f64, f64) {
        if n < 2 {
            (v[0], f64::NAN)
        } else {
            let m = describe(&v).expect("n >= 2");
            (m.mean, m.sem())
        }
    };
    let (intensity, intensity_se) = spread(per_sample.iter().map(|p| p.0).collect());
    let (estimates, standard_errors) = (0..nb).map(|b| spread(per_sample.iter().map(|p| p.1[b]).collect())).unzip();
    Ok(BinnedCorrelation {
        dim: d,
        bin_edges: bin_edges.to_vec(),
        estimates,
        standard_errors,
        pair_counts: counts,
        empty: ref_vol.iter().map(|&v| v <= 0.0).collect(),
        intensity,
        intensity_se,
        n_samples: n,
        per_sample,
    })
}

/// An estimate of the covariance constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CEstimate {
    pub method: &'static str,
    pub value: f64,
    pub standard_error: f64,
    /// Bound on the mass of `r_2 - r_1^2` beyond the last bin, from an
    /// exponential fit to the far bins. `None` when no fit was possible.
    pub truncation_bound: Option<f64>,
    pub tail_fit: Option<DecayFit>,
    /// `(lambda, Var/(lambda^d |B|), SE)` for the variance method.
    pub by_lambda: Vec<(f64, f64, f64)>,
}

/// `C = sum_b (r2_b - r1^2) |shell_b| + r1` over the bins, with a tail
/// bound from an exponential fit on bins beyond the hard core.
pub fn estimate_c_corr(corr: &BinnedCorrelation) -> Result<CEstimate> {
    if corr.empty.iter().any(|&e| e) {
        return Err(Error::Config("bins extend beyond the window".into()));
    }
    let nb = corr.estimates.len();
    let r1 = corr.intensity;
    let value = (0..nb).map(|b| (corr.estimates[b] - r1 * r1) * corr.shell_volume(b)).sum::<f64>() + r1;
    let per: Vec<f64> =
        corr.per_sample.iter().map(|(r1i, est)| (0..nb).map(|b| (est[b] - r1i * r1i) * corr.shell_volume(b)).sum::<f64>() + r1i).collect();
    let standard_error = if per.len() > 1 { describe(&per)?.sem() } else { f64::NAN };

    let far: Vec<usize> = (0..nb).filter(|&b| corr.bin_edges[b] >= 2.0).collect();
    let x: Vec<f64> = far.iter().map(|&b| corr.bin_mid(b)).collect();
    let y: Vec<f64> = far.iter().map(|&b| (corr.estimates[b] - r1 * r1).abs()).collect();
    let se: Vec<f64> = far.iter().map(|&b| corr.standard_errors[b]).collect();
    let tail_fit = fit_decay(&x, &y, &se).ok().filter(|f| f.rate > 0.0);
    let truncation_bound = tail_fit.map(|f| {
        // A e^{-rate s} integrated over |s| > S: d w_d A Gamma(d, rate S) / rate^d
        let d = corr.dim as f64;
        let s = corr.bin_edges[nb];
        d * unit_ball_volume(corr.dim) * f.amplitude * gamma_ur(d, f.rate * s) * gamma(d) / f.rate.powf(d)
    });
    Ok(CEstimate { method: "corr", value, standard_error, truncation_bound, tail_fit, by_lambda: Vec::new() })
}

/// `Var[count] / (lambda^d |B|)` at the largest `lambda`; the whole series
/// is kept for convergence checks. `series` holds `(lambda, counts)`.
pub fn estimate_c_var(series: &[(f64, Vec<f64>)], box_volume: f64, dim: usize) -> Result<CEstimate> {
    if series.is_empty() || !(box_volume > 0.0) {
        return Err(Error::Config("need a positive box volume and at least one lambda".into()));
    }
    let mut by_lambda = Vec::with_capacity(series.len());
    for (lambda, counts) in series {
        let scale = lambda.powi(dim as i32) * box_volume;
        let m = describe(counts)?;
        by_lambda.push((*lambda, m.variance / scale, variance_se(counts)? / scale));
    }
    by_lambda.sort_by(|a, b| a.0.total_cmp(&b.0));
    let &(_, value, standard_error) = by_lambda.last().expect("nonempty");
    Ok(CEstimate { method: "var", value, standard_error, truncation_bound: None, tail_fit: None, by_lambda })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictedMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Unit directions with quadrature weights summing to the sphere area.
fn sphere_rule(d: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    match d {
        1 => Ok(vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)]),
        2 => {
            let n = 256;
            let w = 2.0 * std::f64::consts::PI / n as f64;
            Ok((0..n)
                .map(|k| {
                    let a = (k as f64 + 0.5) * w;
                    (vec![a.cos(), a.sin()], w)
                })
                .collect())
        }
        3 => {
            // Fibonacci lattice on the sphere
            let n = 1024;
            let w = 4.0 * std::f64::consts::PI / n as f64;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            Ok((0..n)
                .map(|k| {
                    let z = 1.0 - (2 * k + 1) as f64 / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    (vec![r * a.cos(), r * a.sin(), z], w)
                })
                .collect())
        }
        _ => Err(Error::Config(format!("moment quadrature supports d <= 3, got {d}"))),
    }
}

/// Mean and variance of the accepted count in a box, from a homogeneous
/// intensity and radial pair correlation:
/// `mean = r1 |B|`, `var = r1 |B| + int int_{B x B} (r2(x - y) - r1 r1) dx dy`.
/// Beyond the last bin `r2 = r1^2` is assumed. An empty region gives zeros.
pub fn moments_from_correlations(corr: &BinnedCorrelation, region: &Region<f64>) -> Result<PredictedMoments> {
    if region.is_empty() {
        return Ok(PredictedMoments { mean: 0.0, variance: 0.0 });
    }
    let Some(b) = region.as_box() else {
        return Err(Error::Config("moment formulas are evaluated on a single box".into()));
    };
    if b.dim() != corr.dim {
        return Err(Error::Dimension { expected: corr.dim, got: b.dim() });
    }
    let sides: Vec<f64> = b.lower.iter().zip(&b.upper).map(|(l, u)| u - l).collect();
    let vol: f64 = sides.iter().product();
    let cov = |v: &[f64]| -> f64 { sides.iter().zip(v).map(|(l, c)| (l - c.abs()).max(0.0)).product() };
    let rule = sphere_rule(corr.dim)?;
    let r1 = corr.intensity;
    let sub = 16;
    let mut var = r1 * vol;
    for bi in 0..corr.estimates.len() {
        let (lo, hi) = (corr.bin_edges[bi], corr.bin_edges[bi + 1]);
        let h = (hi - lo) / sub as f64;
        let mut mass = 0.0;
        for k in 0..sub {
            let s = lo + (k as f64 + 0.5) * h;
            let ring: f64 = rule.iter().map(|(u, w)| w * cov(&u.iter().map(|c| c * s).collect::<Vec<_>>())).sum();
            mass += ring * s.powi(corr.dim as i32 - 1) * h;
        }
        var += (corr.estimates[bi] - r1 * r1) * mass;
    }
    Ok(PredictedMoments { mean: r1 * vol, variance: var })
}
