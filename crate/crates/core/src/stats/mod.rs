//! Descriptive statistics, normality tests and straight-line fits.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::input::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Unbiased (n - 1) variance.
    pub variance: f64,
    /// Moment-ratio skewness `m3 / m2^1.5`.
    pub skewness: f64,
    /// `m4 / m2^2 - 3`.
    pub excess_kurtosis: f64,
}

impl Moments {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }
}

pub fn describe(data: &[f64]) -> Result<Moments> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("{n} values, need at least 2")));
    }
    let nf = n as f64;
    let mean = data.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in data {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let (skewness, excess_kurtosis) = if m2 > 0.0 { (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0) } else { (0.0, 0.0) };
    Ok(Moments { n, mean, variance: m2 * nf / (nf - 1.0), skewness, excess_kurtosis })
}

/// Standard error of an unbiased sample variance, from the fourth moment.
pub fn variance_se(data: &[f64]) -> Result<f64> {
    let m = describe(data)?;
    let n = m.n as f64;
    let s2 = m.variance * (n - 1.0) / n;
    let m4 = (m.excess_kurtosis + 3.0) * s2 * s2;
    Ok(((m4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt())
}

pub fn mean(data: &[f64]) -> f64 {
    data.iter().sum::<f64>() / data.len() as f64
}

/// Unbiased covariance of two paired series.
pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1.0)
}

/// Standard error of [`covariance`] from the spread of the centred products.
pub fn covariance_se(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (mean(a), mean(b));
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let mp = mean(&prods);
    let v = prods.iter().map(|p| (p - mp) * (p - mp)).sum::<f64>() / (n - 1.0);
    (v / n).sqrt()
}

pub fn std_normal_cdf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").cdf(z)
}

/// Kolmogorov distance between the sample and the normal law with the
/// sample's own mean and standard deviation.
pub fn ks_statistic_fitted(data: &[f64]) -> Result<f64> {
    let m = describe(data)?;
    let sd = m.std_dev();
    if !(sd > 0.0) {
        return Err(Error::Numerical("zero variance".into()));
    }
    let mut z: Vec<f64> = data.iter().map(|x| (x - m.mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    Ok(z.iter().enumerate().fold(0.0f64, |acc, (i, &v)| {
        let f = std_normal_cdf(v);
        acc.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    }))
}

/// Lilliefors p-value: the fitted KS statistic is referred to its null
/// distribution, simulated with `sims` normal samples of the same size.
pub fn lilliefors_pvalue(data: &[f64], sims: usize, key: u64) -> Result<f64> {
    let d = ks_statistic_fitted(data)?;
    let mut rng = stream_rng(key);
    let mut buf = vec![0.0; data.len()];
    let mut exceed = 0usize;
    for _ in 0..sims {
        for v in buf.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        if ks_statistic_fitted(&buf)? >= d {
            exceed += 1;
        }
    }
    Ok((exceed + 1) as f64 / (sims + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AndersonDarling {
    pub statistic: f64,
    /// Small-sample adjusted statistic `A2 (1 + 0.75/n + 2.25/n^2)`.
    pub adjusted: f64,
    pub p_value: f64,
}

/// Anderson-Darling test for normality with mean and variance estimated.
pub fn anderson_darling(data: &[f64]) -> Result<AndersonDarling> {
    let m = describe(data)?;
    let sd = m.std_dev();
    if !(sd > 0.0) {
        return Err(Error::Numerical("zero variance".into()));
    }
    let mut z: Vec<f64> = data.iter().map(|x| (x - m.mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len();
    let nf = n as f64;
    let tiny = 1e-300;
    let s: f64 = (0..n)
        .map(|i| {
            let fi = std_normal_cdf(z[i]).max(tiny);
            let fj = (1.0 - std_normal_cdf(z[n - 1 - i])).max(tiny);
            (2 * i + 1) as f64 * (fi.ln() + fj.ln())
        })
        .sum();
    let a2 = -nf - s / nf;
    let a = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = if a >= 0.6 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a >= 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a >= 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    };
    Ok(AndersonDarling { statistic: a2, adjusted: a, p_value: p.clamp(0.0, 1.0) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_se: f64,
    pub n: usize,
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Config("x and y lengths differ".into()));
    }
    if n < 2 {
        return Err(Error::InsufficientData(format!("{n} points, need at least 2")));
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Numerical("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    let slope_se = if n > 2 { (sse / (n - 2) as f64 / sxx).sqrt() } else { f64::NAN };
    Ok(LineFit { slope, intercept, r_squared, slope_se, n })
}
