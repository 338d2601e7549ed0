use serde::Serialize;

use crate::error::{Error, Result};
use crate::input::rng::{key, stream, stream_rng, uniform};
use crate::input::{Aabb, CellField, Region, SpaceTimePoint, Substrate};
use crate::packing::{lattice_block_times, pack_window_infinite, sigma_infinite, sigma_infinite_joint};
use crate::parallel::{replicate_field, replicate_map};
use crate::scalar::Scalar;
use crate::stats::{describe, linear_fit};

/// Monte Carlo estimate of a probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub n_samples: usize,
    /// Value fixed by the configuration rather than estimated.
    pub degenerate: bool,
}

impl ProbabilityEstimate {
    pub fn exact(value: f64, n_samples: usize) -> Self {
        ProbabilityEstimate { value, standard_error: 0.0, n_samples, degenerate: true }
    }

    /// Mean and standard error of per-sample values in [0, 1].
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InsufficientData("no samples".into()));
        }
        let (value, standard_error) = if n == 1 {
            (values[0], f64::NAN)
        } else {
            let m = describe(values)?;
            (m.mean, m.sem())
        };
        Ok(ProbabilityEstimate { value, standard_error, n_samples: n, degenerate: false })
    }

    pub fn from_indicators(hits: impl IntoIterator<Item = bool>) -> Result<Self> {
        let v: Vec<f64> = hits.into_iter().map(|h| if h { 1.0 } else { 0.0 }).collect();
        Self::from_values(&v)
    }

    /// `value +- 3 SE`, clamped to [0, 1].
    pub fn band3(&self) -> (f64, f64) {
        ((self.value - 3.0 * self.standard_error).max(0.0), (self.value + 3.0 * self.standard_error).min(1.0))
    }
}

/// Exponential fit `y ~ amplitude * exp(-rate * x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub fit_range: (f64, f64),
    pub n_used: usize,
}

/// Least squares on `ln y`, skipping points with `y <= 2 SE` (or `y <= 0`).
/// Needs three usable points.
pub fn fit_decay(x: &[f64], y: &[f64], se: &[f64]) -> Result<DecayFit> {
    let keep: Vec<usize> = (0..x.len()).filter(|&i| y[i] > 0.0 && !(y[i] <= 2.0 * se[i])).collect();
    if keep.len() < 3 {
        return Err(Error::InsufficientData(format!("{} usable points for a decay fit, need 3", keep.len())));
    }
    let xs: Vec<f64> = keep.iter().map(|&i| x[i]).collect();
    let ly: Vec<f64> = keep.iter().map(|&i| y[i].ln()).collect();
    let f = linear_fit(&xs, &ly)?;
    Ok(DecayFit {
        rate: -f.slope,
        amplitude: f.intercept.exp(),
        r_squared: f.r_squared,
        fit_range: (xs[0], xs[xs.len() - 1]),
        n_used: keep.len(),
    })
}

fn check_tests<T: Scalar>(tests: &[SpaceTimePoint<T>], field: &CellField<T>) -> Result<()> {
    if tests.is_empty() {
        return Err(Error::Config("no test points".into()));
    }
    for (i, w) in tests.iter().enumerate() {
        if w.dim() != field.dim() {
            return Err(Error::Dimension { expected: field.dim(), got: w.dim() });
        }
        if !w.is_valid() {
            return Err(Error::Config(format!("test point {i} is invalid")));
        }
        if tests[..i].iter().any(|v| v.coincides(w)) {
            return Err(Error::Config("test points must be distinct".into()));
        }
    }
    Ok(())
}

/// Probability that all test points are packed against an independent
/// copy of the input. Sample `i` uses the `i`-th replicate field of
/// `base`, so calls with the same base share random numbers.
///
/// With `joint_blocking` the test points are inserted together and may
/// block one another; without it each is judged against the input alone.
pub fn estimate_rbar<T: Scalar>(
    tests: &[SpaceTimePoint<T>],
    base: &CellField<T>,
    n_samples: usize,
    joint_blocking: bool,
) -> Result<ProbabilityEstimate> {
    check_tests(tests, base)?;
    base.tau()?;
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be positive".into()));
    }
    if joint_blocking {
        let four = T::lit(4.0);
        let clash = tests.iter().enumerate().any(|(i, a)| tests[i + 1..].iter().any(|b| a.dist2(b) < four));
        if clash {
            return Ok(ProbabilityEstimate::exact(0.0, n_samples));
        }
    }
    let hits = replicate_map(n_samples, |i| {
        let f = replicate_field(base, i);
        if joint_blocking {
            Ok(sigma_infinite_joint(tests, &f)?.0.iter().all(|&a| a))
        } else {
            for w in tests {
                if !sigma_infinite(w, &f)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    })?;
    ProbabilityEstimate::from_indicators(hits)
}

/// Settings for spatially averaged one-point profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileWindow {
    /// Side of the cubic averaging window.
    pub side: f64,
    /// Probe points per window in d >= 2 (d = 1 is computed exactly).
    pub probes: usize,
}

impl Default for ProfileWindow {
    fn default() -> Self {
        ProfileWindow { side: 1000.0, probes: 4000 }
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("time grid must be ascending and nonnegative".into()));
    }
    Ok(())
}

/// Covered length of `[0, side]` by the open intervals `(c - 2, c + 2)`.
fn covered_length(mut centres: Vec<f64>, side: f64) -> f64 {
    centres.sort_by(f64::total_cmp);
    let mut covered = 0.0;
    let mut reach = 0.0f64;
    for c in centres {
        let lo = (c - 2.0).max(reach).max(0.0);
        let hi = (c + 2.0).min(side);
        if hi > lo {
            covered += hi - lo;
        }
        reach = reach.max(c + 2.0);
    }
    covered
}

/// One-point correlation `r_1(t)` of the continuum process: the
/// probability that a ball arriving at time `t` is packed, times the
/// indicator of `t <= tau`.
///
/// By homogeneity the probability equals the fraction of space still
/// available at time `t`, so each sample packs one window exactly (infinite
/// volume) and reads the whole curve off it. A longer cutoff only appends
/// later arrivals, so the field's cutoff acts as the time horizon.
pub fn r1_profile<T: Scalar>(
    base: &CellField<T>,
    t_grid: &[f64],
    n_samples: usize,
    window: ProfileWindow,
) -> Result<Vec<ProbabilityEstimate>> {
    let tau = base.tau()?.as_f64();
    check_grid(t_grid)?;
    if n_samples == 0 || !(window.side > 0.0) {
        return Err(Error::Config("need samples and a positive window".into()));
    }
    let d = base.dim();
    if d > 1 && window.probes == 0 {
        return Err(Error::Config("need probe points for d >= 2".into()));
    }
    let side = T::lit(window.side);
    let inner = Aabb::new(&vec![T::zero(); d], &vec![side; d])?;
    let outer = Region::from_box(inner.inflated(T::lit(2.0)).expect("positive margin"));
    let per_sample = replicate_map(n_samples, |i| {
        let f = replicate_field(base, i);
        let s = pack_window_infinite(&f, &outer)?;
        let acc: Vec<(Vec<f64>, f64)> = s.accepted_points().map(|p| (p.x.iter().map(|c| c.as_f64()).collect(), p.t.as_f64())).collect();
        if d == 1 {
            return Ok(t_grid
                .iter()
                .map(|&t| {
                    let centres = acc.iter().filter(|(_, tc)| *tc < t).map(|(x, _)| x[0]).collect();
                    1.0 - covered_length(centres, window.side) / window.side
                })
                .collect::<Vec<f64>>());
        }
        // d >= 2: time at which each probe gets covered
        let mut rng = stream_rng(key(f.master_seed(), stream::AUX, &[1]));
        let grid = CentreIndex::new(&acc);
        let cover: Vec<f64> = (0..window.probes)
            .map(|_| {
                let x: Vec<f64> = (0..d).map(|k| uniform(&mut rng, inner.lower[k].as_f64(), inner.upper[k].as_f64())).collect();
                grid.first_cover(&x)
            })
            .collect();
        Ok(t_grid.iter().map(|&t| cover.iter().filter(|&&c| c >= t).count() as f64 / window.probes as f64).collect())
    })?;
    t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            if t > tau {
                return Ok(ProbabilityEstimate::exact(0.0, n_samples));
            }
            if t == 0.0 {
                return Ok(ProbabilityEstimate::exact(1.0, n_samples));
            }
            let v: Vec<f64> = per_sample.iter().map(|s| s[k]).collect();
            ProbabilityEstimate::from_values(&v)
        })
        .collect()
}

/// Accepted centres hashed on a grid of side 2.
struct CentreIndex<'a> {
    cells: std::collections::HashMap<Vec<i64>, Vec<usize>>,
    pts: &'a [(Vec<f64>, f64)],
}

impl<'a> CentreIndex<'a> {
    fn new(pts: &'a [(Vec<f64>, f64)]) -> Self {
        let mut cells: std::collections::HashMap<Vec<i64>, Vec<usize>> = std::collections::HashMap::new();
        for (i, (x, _)) in pts.iter().enumerate() {
            cells.entry(Self::key(x)).or_default().push(i);
        }
        CentreIndex { cells, pts }
    }

    fn key(x: &[f64]) -> Vec<i64> {
        x.iter().map(|c| (c / 2.0).floor() as i64).collect()
    }

    /// Earliest arrival among centres within distance `< 2` of `x`.
    fn first_cover(&self, x: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        let base = Self::key(x);
        crate::packing::visit_neighbour_keys(&base, |k| {
            if let Some(ids) = self.cells.get(k.as_slice()) {
                for &i in ids {
                    let (c, t) = &self.pts[i];
                    if crate::scalar::dist2(c, x) < 4.0 {
                        best = best.min(*t);
                    }
                }
            }
        });
        best
    }
}

/// Lattice analogue of [`r1_profile`]: the fraction of window sites whose
/// block time is at least `t`. Any positive times are allowed.
pub fn lattice_r1_profile<T: Scalar>(
    base: &CellField<T>,
    t_grid: &[f64],
    n_samples: usize,
    window_side: usize,
) -> Result<Vec<ProbabilityEstimate>> {
    if base.substrate() != Substrate::Lattice {
        return Err(Error::Mode { expected: "lattice" });
    }
    check_grid(t_grid)?;
    if n_samples == 0 || window_side == 0 {
        return Err(Error::Config("need samples and a nonempty window".into()));
    }
    let d = base.dim();
    let w = Region::from_box(Aabb::new(&vec![T::zero(); d], &vec![T::lit(window_side as f64); d])?);
    let per_sample = replicate_map(n_samples, |i| {
        let bt = lattice_block_times(&replicate_field(base, i), &w)?;
        let n = bt.len() as f64;
        Ok(t_grid.iter().map(|&t| bt.iter().filter(|(_, b)| *b >= t).count() as f64 / n).collect::<Vec<f64>>())
    })?;
    t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            if t == 0.0 {
                return Ok(ProbabilityEstimate::exact(1.0, n_samples));
            }
            ProbabilityEstimate::from_values(&per_sample.iter().map(|s| s[k]).collect::<Vec<_>>())
        })
        .collect()
}

/// Profile plus exponential fit over the positive times of the grid.
pub fn lattice_r1_decay<T: Scalar>(
    base: &CellField<T>,
    t_grid: &[f64],
    n_samples: usize,
    window_side: usize,
) -> Result<(Vec<ProbabilityEstimate>, DecayFit)> {
    let prof = lattice_r1_profile(base, t_grid, n_samples, window_side)?;
    let idx: Vec<usize> = (0..t_grid.len()).filter(|&i| t_grid[i] > 0.0).collect();
    let x: Vec<f64> = idx.iter().map(|&i| t_grid[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| prof[i].value).collect();
    let se: Vec<f64> = idx.iter().map(|&i| prof[i].standard_error).collect();
    let fit = fit_decay(&x, &y, &se)?;
    Ok((prof, fit))
}

/// Trapezoid integral of a profile over its grid: with `t_grid` spanning
/// `[0, tau]` this is the spatial intensity of accepted points.
pub fn integrate_profile(t_grid: &[f64], profile: &[ProbabilityEstimate]) -> f64 {
    t_grid.windows(2).zip(profile.windows(2)).map(|(t, p)| 0.5 * (t[1] - t[0]) * (p[0].value + p[1].value)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::pack_sequential;

    fn w(x: f64, t: f64) -> SpaceTimePoint<f64> {
        SpaceTimePoint::new(&[x], t)
    }

    #[test]
    fn time_zero_is_always_packed() {
        let f = CellField::<f64>::continuum(1, 1, 1.0).unwrap();
        let e = estimate_rbar(&[w(0.0, 0.0)], &f, 200, true).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn overlapping_tests_are_degenerate() {
        let f = CellField::<f64>::continuum(1, 1, 1.0).unwrap();
        let e = estimate_rbar(&[w(0.0, 0.2), w(1.0, 0.3)], &f, 50, true).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.degenerate && e.standard_error == 0.0);
        assert!(estimate_rbar(&[w(0.0, 0.2), w(0.0, 0.2)], &f, 5, true).is_err());
        assert!(estimate_rbar(&[w(0.0, 0.2)], &f, 0, true).is_err());
    }

    #[test]
    fn agrees_with_padded_box_insertion() {
        let base = CellField::<f64>::continuum(77, 1, 1.0).unwrap();
        let n = 4000;
        let e = estimate_rbar(&[w(0.0, 0.5)], &base, n, true).unwrap();
        let box20 = Region::from_box(Aabb::new(&[-20.0], &[20.0]).unwrap());
        let hits: Vec<bool> = (0..n)
            .map(|i| {
                let f = CellField::<f64>::continuum(9_000_000 + i as u64, 1, 1.0).unwrap();
                let mut pts = f.sample_window(&box20).unwrap();
                pts.push(w(0.0, 0.5));
                pts.sort_by(|a, b| a.arrival_cmp(b));
                let k = pts.iter().position(|p| p.coincides(&w(0.0, 0.5))).unwrap();
                pack_sequential(pts).unwrap().accepted[k]
            })
            .collect();
        let b = ProbabilityEstimate::from_indicators(hits).unwrap();
        let se = (e.standard_error.powi(2) + b.standard_error.powi(2)).sqrt();
        assert!((e.value - b.value).abs() < 3.0 * se, "{e:?} {b:?}");
    }

    // Blocking is not monotone: an accepted test point can remove the
    // field point that would have blocked the other one.
    #[test]
    fn joint_insertion_can_unblock() {
        use crate::packing::pack_flags;
        let p = w(1.3, 0.7);
        let (w1, w2) = (w(0.0, 0.6), w(2.5, 0.9));
        assert_eq!(pack_flags(std::slice::from_ref(&w1)), vec![true]);
        assert_eq!(pack_flags(&[p.clone(), w2.clone()]), vec![true, false]);
        assert_eq!(pack_flags(&[w1, p, w2]), vec![true, false, true]);
    }

    #[test]
    fn joint_and_separate_agree_for_distant_tests() {
        let base = CellField::<f64>::continuum(8, 1, 1.0).unwrap();
        let tests = [w(0.0, 0.6), w(40.0, 0.9)];
        let a = estimate_rbar(&tests, &base, 400, true).unwrap();
        let b = estimate_rbar(&tests, &base, 400, false).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn profile_is_monotone_and_vanishes_after_cutoff() {
        let f = CellField::<f64>::continuum(3, 1, 2.0).unwrap();
        let grid = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5];
        let p = r1_profile(&f, &grid, 8, ProfileWindow { side: 300.0, probes: 0 }).unwrap();
        assert_eq!(p[0].value, 1.0);
        assert_eq!(p[6].value, 0.0);
        assert!(p.windows(2).all(|q| q[1].value <= q[0].value));
    }

    #[test]
    fn profile_matches_direct_insertion() {
        let f = CellField::<f64>::continuum(12, 1, 1.0).unwrap();
        let p = r1_profile(&f, &[0.5], 20, ProfileWindow { side: 500.0, probes: 0 }).unwrap()[0];
        let e = estimate_rbar(&[w(0.0, 0.5)], &f.reseeded(99), 3000, true).unwrap();
        let se = (p.standard_error.powi(2) + e.standard_error.powi(2)).sqrt();
        assert!((p.value - e.value).abs() < 3.0 * se, "{p:?} {e:?}");
    }

    #[test]
    fn planar_profile_uses_probes() {
        let f = CellField::<f64>::continuum(3, 2, 1.0).unwrap();
        let p = r1_profile(&f, &[0.3, 0.8], 4, ProfileWindow { side: 30.0, probes: 500 }).unwrap();
        assert!(p[0].value > p[1].value && p[1].value > 0.0);
    }

    #[test]
    fn covered_length_merges_overlaps() {
        assert_eq!(covered_length(vec![5.0, 6.0], 20.0), 5.0);
        assert_eq!(covered_length(vec![1.0], 20.0), 3.0);
        assert_eq!(covered_length(vec![], 20.0), 0.0);
    }

    #[test]
    fn lattice_profile_respects_own_clock_bound() {
        let f = CellField::<f64>::lattice(4, 1).unwrap();
        let grid = [0.0, 0.5, 1.0, 2.0, 3.0];
        let (p, fit) = lattice_r1_decay(&f, &grid, 10, 2000).unwrap();
        assert_eq!(p[0].value, 1.0);
        for (t, e) in grid.iter().zip(&p) {
            assert!(e.value <= (-t).exp() + 3.0 * e.standard_error);
        }
        assert!(fit.rate > 0.0);
        assert!(lattice_r1_profile(&CellField::<f64>::continuum(1, 1, 1.0).unwrap(), &grid, 1, 10).is_err());
    }

    #[test]
    fn decay_fit_recovers_rate() {
        let x: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * (-0.7 * v).exp()).collect();
        let f = fit_decay(&x, &y, &[0.0; 8]).unwrap();
        assert!((f.rate - 0.7).abs() < 1e-12 && (f.amplitude - 3.0).abs() < 1e-9);
        assert!(fit_decay(&x[..2], &y[..2], &[0.0; 2]).is_err());
        // points within two standard errors of zero are dropped
        let g = fit_decay(&x, &y, &y.iter().enumerate().map(|(i, v)| if i > 4 { *v } else { 0.0 }).collect::<Vec<_>>()).unwrap();
        assert_eq!(g.n_used, 5);
    }
}
