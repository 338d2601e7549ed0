use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rescaled::RescaledVectorSample;
use crate::error::{Error, Result};
use crate::input::rng::{key, stream_rng};
use crate::stats::{anderson_darling, covariance, covariance_se, describe, lilliefors_pvalue};

/// Minimum replicate count accepted by [`gaussianity_report`].
pub const MIN_REPLICATES: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianityOptions {
    /// Add `U(-1/2, 1/2) / lambda^{d/2}` before the KS and AD tests so that
    /// integer-valued counts become continuous. Moments are computed on the
    /// raw values.
    pub jitter: bool,
    pub lilliefors_sims: usize,
    pub seed: u64,
}

impl Default for GaussianityOptions {
    fn default() -> Self {
        Self { jitter: true, lilliefors_sims: 400, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianityThresholds {
    pub max_abs_skewness: f64,
    pub max_abs_excess_kurtosis: f64,
    pub min_ad_pvalue: f64,
    pub max_relative_deviation: f64,
    /// Zero-prediction entries must lie within this many standard errors.
    pub max_zero_entry_z: f64,
}

impl Default for GaussianityThresholds {
    fn default() -> Self {
        Self {
            max_abs_skewness: 0.15,
            max_abs_excess_kurtosis: 0.3,
            min_ad_pvalue: 0.01,
            max_relative_deviation: 0.15,
            max_zero_entry_z: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxNormality {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub ks_pvalue: f64,
    pub ad_pvalue: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianityReport {
    pub lambda: f64,
    pub n_replicates: usize,
    pub c_estimate: f64,
    pub boxes: Vec<BoxNormality>,
    pub empirical_covariance: Vec<Vec<f64>>,
    pub covariance_se: Vec<Vec<f64>>,
    pub predicted_covariance: Vec<Vec<f64>>,
    /// Largest `|emp - pred| / pred` over entries with nonzero prediction.
    pub max_relative_deviation: f64,
    /// Largest `|emp| / se` over entries with zero prediction.
    pub max_zero_entry_z: f64,
    pub thresholds: GaussianityThresholds,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Normality and covariance checks for one replicate set. The predicted
/// covariance is `c_estimate * vol(B_i ∩ B_j)` on the unscaled boxes.
pub fn gaussianity_report(
    samples: &[RescaledVectorSample],
    c_estimate: f64,
    options: &GaussianityOptions,
    thresholds: &GaussianityThresholds,
) -> Result<GaussianityReport> {
    let n = samples.len();
    if n < MIN_REPLICATES {
        return Err(Error::InsufficientData(format!("{n} replicates, need at least {MIN_REPLICATES}")));
    }
    let first = &samples[0];
    let k = first.boxes.len();
    if samples.iter().any(|s| s.lambda != first.lambda || s.boxes != first.boxes || s.centered_scaled.len() != k) {
        return Err(Error::Config("replicates must share lambda and boxes".into()));
    }
    let d = first.boxes.first().map_or(1, |b| b.dim());
    let cols: Vec<Vec<f64>> = (0..k).map(|j| samples.iter().map(|s| s.centered_scaled[j]).collect()).collect();
    let jitter_width = 1.0 / first.lambda.powf(d as f64 / 2.0);

    let mut failures = Vec::new();
    let mut boxes = Vec::with_capacity(k);
    for (j, col) in cols.iter().enumerate() {
        let m = describe(col)?;
        if !(m.variance > 0.0) {
            failures.push(format!("box {j}: zero variance"));
            boxes.push(BoxNormality {
                mean: m.mean,
                variance: 0.0,
                skewness: f64::NAN,
                excess_kurtosis: f64::NAN,
                ks_pvalue: f64::NAN,
                ad_pvalue: f64::NAN,
                degenerate: true,
            });
            continue;
        }
        let tested: Vec<f64> = if options.jitter {
            let mut rng = stream_rng(key(options.seed, 0x6a17, &[j as i64]));
            col.iter().map(|v| v + (rng.random::<f64>() - 0.5) * jitter_width).collect()
        } else {
            col.clone()
        };
        let ad = anderson_darling(&tested)?;
        let ks = lilliefors_pvalue(&tested, options.lilliefors_sims, key(options.seed, 0x6a18, &[j as i64]))?;
        if m.skewness.abs() > thresholds.max_abs_skewness {
            failures.push(format!("box {j}: skewness {:.3}", m.skewness));
        }
        if m.excess_kurtosis.abs() > thresholds.max_abs_excess_kurtosis {
            failures.push(format!("box {j}: excess kurtosis {:.3}", m.excess_kurtosis));
        }
        if ad.p_value <= thresholds.min_ad_pvalue {
            failures.push(format!("box {j}: AD p-value {:.4}", ad.p_value));
        }
        boxes.push(BoxNormality {
            mean: m.mean,
            variance: m.variance,
            skewness: m.skewness,
            excess_kurtosis: m.excess_kurtosis,
            ks_pvalue: ks,
            ad_pvalue: ad.p_value,
            degenerate: false,
        });
    }

    let mut emp = vec![vec![0.0; k]; k];
    let mut se = vec![vec![0.0; k]; k];
    let mut pred = vec![vec![0.0; k]; k];
    let (mut max_rel, mut max_z) = (0.0f64, 0.0f64);
    for i in 0..k {
        for j in i..k {
            let c = covariance(&cols[i], &cols[j]);
            let s = covariance_se(&cols[i], &cols[j]);
            let overlap = first.boxes[i].intersect(&first.boxes[j]).map_or(0.0, |b| b.volume());
            let p = c_estimate * overlap;
            emp[i][j] = c;
            emp[j][i] = c;
            se[i][j] = s;
            se[j][i] = s;
            pred[i][j] = p;
            pred[j][i] = p;
            if overlap > 0.0 {
                let rel = ((c - p) / p).abs();
                max_rel = max_rel.max(rel);
                if rel > thresholds.max_relative_deviation {
                    failures.push(format!("cov[{i}][{j}] = {c:.4} vs predicted {p:.4}"));
                }
            } else {
                let z = if s > 0.0 {
                    c.abs() / s
                } else if c == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                max_z = max_z.max(z);
                if z > thresholds.max_zero_entry_z {
                    failures.push(format!("cov[{i}][{j}] = {c:.4} is {z:.2} SE from 0"));
                }
            }
        }
    }
    Ok(GaussianityReport {
        lambda: first.lambda,
        n_replicates: n,
        c_estimate,
        boxes,
        empirical_covariance: emp,
        covariance_se: se,
        predicted_covariance: pred,
        max_relative_deviation: max_rel,
        max_zero_entry_z: max_z,
        thresholds: *thresholds,
        passed: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::Aabb;
    use rand_distr::StandardNormal;

    fn b1(lo: f64, hi: f64) -> Aabb<f64> {
        Aabb::new(&[lo], &[hi]).unwrap()
    }

    // box 0 = [0,1), box 1 = [5,6), box 2 = [0.5,1.5): independent unit-variance
    // white noise integrated over each box
    fn synthetic(n: usize, seed: u64) -> Vec<RescaledVectorSample> {
        let boxes = vec![b1(0.0, 1.0), b1(5.0, 6.0), b1(0.5, 1.5)];
        let mut r = stream_rng(seed);
        let rows = (0..n)
            .map(|i| {
                let g: Vec<f64> = (0..5).map(|_| r.sample::<f64, _>(StandardNormal) * 0.5f64.sqrt()).collect();
                (i as u64, vec![g[0] + g[1], g[3] + g[4], g[1] + g[2]])
            })
            .collect();
        RescaledVectorSample::from_rows(1.0, &boxes, "infinite", rows).unwrap()
    }

    #[test]
    fn gaussian_null_passes() {
        let s = synthetic(2000, 4);
        let opts = GaussianityOptions { jitter: false, lilliefors_sims: 200, seed: 1 };
        let r = gaussianity_report(&s, 1.0, &opts, &GaussianityThresholds::default()).unwrap();
        assert!(r.passed, "{:?}", r.failures);
        assert!((r.predicted_covariance[0][2] - 0.5).abs() < 1e-12);
        assert_eq!(r.predicted_covariance[0][1], 0.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(r.empirical_covariance[i][j], r.empirical_covariance[j][i]);
            }
        }
        assert!(r.boxes.iter().all(|b| (0.0..=1.0).contains(&b.ad_pvalue) && (0.0..=1.0).contains(&b.ks_pvalue)));
    }

    #[test]
    fn uniform_input_is_rejected() {
        let mut r = stream_rng(8);
        let rows = (0..1000).map(|i| (i, vec![r.random::<f64>()])).collect();
        let s = RescaledVectorSample::from_rows(1.0, &[b1(0.0, 1.0)], "infinite", rows).unwrap();
        let opts = GaussianityOptions { jitter: false, lilliefors_sims: 100, seed: 1 };
        let rep = gaussianity_report(&s, 1.0 / 12.0, &opts, &GaussianityThresholds::default()).unwrap();
        assert!(rep.boxes[0].ad_pvalue < 0.01);
        assert!(!rep.passed);
    }

    #[test]
    fn degenerate_and_small_sets() {
        let rows = (0..300).map(|i| (i, vec![2.0])).collect();
        let s = RescaledVectorSample::from_rows(1.0, &[b1(0.0, 1.0)], "finite", rows).unwrap();
        let rep = gaussianity_report(&s, 1.0, &GaussianityOptions::default(), &GaussianityThresholds::default()).unwrap();
        assert!(rep.boxes[0].degenerate && !rep.passed);
        assert!(gaussianity_report(&s[..100], 1.0, &GaussianityOptions::default(), &GaussianityThresholds::default()).is_err());
    }
}
