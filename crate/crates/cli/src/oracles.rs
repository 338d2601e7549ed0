//! Independent reference values for the simulator.

use packlab::input::{Aabb, CellField, Region, SpaceTimePoint};
use packlab::packing::pack_flags;
use packlab::Scalar;

use crate::error::{CliError, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E1(x)` for `x > 1` by continued fraction.
fn e1_large(x: f64) -> f64 {
    // modified Lentz on e^{-x} / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...)))
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

/// `Ein(u) = ∫_0^u (1 - e^{-s}) / s ds`.
pub fn ein(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u <= 8.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..200 {
            term *= -u / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        EULER_GAMMA + u.ln() + e1_large(u)
    }
}

/// Expected accepted centres per unit length for `d = 1`, diameter-2 balls
/// and unit space-time intensity, up to time `tau`: `M(2 tau) / 2` with
/// `M(s) = ∫_0^s exp(-2 Ein(u)) du` the classical car-parking coverage.
pub fn renyi_density_oracle(tau: f64) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(CliError::Config("tau must be positive and finite".into()));
    }
    let f = |u: f64| (-2.0 * ein(u)).exp();
    let s = 2.0 * tau;
    // beyond u = 60 the integrand is below 1e-3 / u^2; split to help the rule
    let mut total = 0.0;
    let mut err = 0.0;
    let mut a = 0.0;
    while a < s {
        let b = (a + 4.0).min(s);
        let out = quadrature::double_exponential::integrate(f, a, b, 1e-12);
        total += out.integral;
        err += out.error_estimate;
        a = b;
    }
    if !(err <= 1e-6 * total.abs()) {
        return Err(CliError::Numerical(format!("quadrature error {err:e} exceeds tolerance")));
    }
    Ok(total / 2.0)
}

/// Acceptance of `w` in sequential packing of the field on the origin
/// cube of half-width `box_halfwidth + margin`, with `w` inserted. `w`
/// should lie in the inner cube of half-width `box_halfwidth`.
pub fn brute_force_sigma_oracle<T: Scalar>(field: &CellField<T>, box_halfwidth: f64, margin: f64, w: &SpaceTimePoint<T>) -> Result<bool> {
    let region = padded_box(field.dim(), box_halfwidth + margin)?;
    let mut pts = field.sample_window(&region)?;
    pts.retain(|p| !p.coincides(w));
    let at = pts.partition_point(|p| p.arrival_cmp(w).is_lt());
    pts.insert(at, w.clone());
    Ok(pack_flags(&pts)[at])
}

pub(crate) fn padded_box<T: Scalar>(dim: usize, half: f64) -> Result<Region<T>> {
    Ok(Region::from_box(Aabb::cube(&vec![T::zero(); dim], T::lit(half))?))
}
