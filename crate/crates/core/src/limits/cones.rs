use serde::Serialize;

use crate::correlation::{fit_decay, DecayFit, ProbabilityEstimate};
use crate::error::{Error, Result};
use crate::input::rng::{key, stream, unit_open};
use crate::input::{CellField, SpaceTimePoint};
use crate::packing::{causal_cone_infinite, CausalCone};
use crate::parallel::{replicate_field, replicate_map};
use crate::scalar::{dist, Scalar};

/// Default slope of the cone sets: `4 max(1, 1/tau)`.
pub fn default_beta(tau: f64) -> f64 {
    4.0 * (1.0f64).max(1.0 / tau)
}

/// Smallest `R` with every cone member in `{ |x - y| <= beta |t_x - t_y| + R }`.
pub fn cone_needed_radius<T: Scalar>(cone: &CausalCone<T>, beta: f64) -> f64 {
    cone.members.iter().fold(0.0f64, |acc, m| {
        let r = dist(&m.x, &cone.root.x).as_f64() - beta * (m.t - cone.root.t).abs().as_f64();
        acc.max(r)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeTailRow {
    pub radius: f64,
    pub escape: ProbabilityEstimate,
    /// No escapes observed; excluded from the fit.
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeTailReport {
    pub beta: f64,
    pub n_samples: usize,
    pub rows: Vec<ConeTailRow>,
    pub fit: Option<DecayFit>,
    /// Per sample needed radius; infinite when exploration hit its cap.
    pub needed: Vec<f64>,
    pub capped: usize,
}

/// Escape frequencies of the full causal cone of `w = (0, U tau)` from the
/// cone sets of slope `beta`, for each radius of `r_grid`.
pub fn cone_tail<T: Scalar>(base: &CellField<T>, r_grid: &[f64], beta: f64, n_samples: usize) -> Result<ConeTailReport> {
    let tau = base.tau()?;
    if !(beta > 0.0) {
        return Err(Error::Config("beta must be positive".into()));
    }
    if r_grid.is_empty() || r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("radius grid must be ascending".into()));
    }
    if n_samples < 2 {
        return Err(Error::Config("need at least two samples".into()));
    }
    let origin = vec![T::zero(); base.dim()];
    let needed = replicate_map(n_samples, |i| {
        let f = replicate_field(base, i);
        let u = unit_open(key(f.master_seed(), stream::AUX, &[2]));
        let w = SpaceTimePoint::new(&origin, tau * T::lit(u));
        match causal_cone_infinite(&w, &f) {
            Ok(c) => Ok(cone_needed_radius(&c, beta)),
            Err(Error::ExplorationCap { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    })?;
    let rows: Vec<ConeTailRow> = r_grid
        .iter()
        .map(|&r| {
            let escape = ProbabilityEstimate::from_indicators(needed.iter().map(|&v| v > r))?;
            Ok(ConeTailRow { radius: r, escape, censored: escape.value == 0.0 })
        })
        .collect::<Result<_>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.radius).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.escape.value).collect();
    let se: Vec<f64> = rows.iter().map(|r| r.escape.standard_error).collect();
    Ok(ConeTailReport {
        beta,
        n_samples,
        rows,
        fit: fit_decay(&x, &y, &se).ok(),
        capped: needed.iter().filter(|v| v.is_infinite()).count(),
        needed,
    })
}

/// [`cone_tail`] for several slopes.
pub fn cone_tail_sweep<T: Scalar>(base: &CellField<T>, r_grid: &[f64], betas: &[f64], n_samples: usize) -> Result<Vec<ConeTailReport>> {
    betas.iter().map(|&b| cone_tail(base, r_grid, b, n_samples)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::ConeDirection;

    #[test]
    fn needed_radius_by_hand() {
        let root = SpaceTimePoint::new(&[0.0], 0.5);
        let members = vec![root.clone(), SpaceTimePoint::new(&[3.0], 0.25), SpaceTimePoint::new(&[-1.0], 0.9)];
        let c = CausalCone { root, members, direction: ConeDirection::Both, spatial_radius: 3.0, time_extent: 0.4 };
        // 3 - 4 * 0.25 = 2, 1 - 4 * 0.4 < 0
        assert!((cone_needed_radius(&c, 4.0) - 2.0).abs() < 1e-12);
        assert!((cone_needed_radius(&c, 100.0)).abs() < 1e-12);
        assert_eq!(default_beta(0.5), 8.0);
        assert_eq!(default_beta(3.0), 4.0);
    }

    #[test]
    fn escape_is_monotone_and_vanishes() {
        let f = CellField::<f64>::continuum(9, 1, 1.0).unwrap();
        let r = cone_tail(&f, &[0.0, 2.0, 4.0, 1000.0], 4.0, 300).unwrap();
        assert!(r.rows.windows(2).all(|w| w[1].escape.value <= w[0].escape.value));
        assert!(r.rows[0].escape.value > 0.0);
        assert!(r.rows[3].censored);
        assert_eq!(r.capped, 0);
    }

    #[test]
    fn arguments_are_checked() {
        let f = CellField::<f64>::continuum(9, 1, 1.0).unwrap();
        assert!(cone_tail(&f, &[2.0, 1.0], 4.0, 10).is_err());
        assert!(cone_tail(&f, &[2.0], 0.0, 10).is_err());
    }
}
