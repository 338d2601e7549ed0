use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::point::{Coord, SpaceTimePoint};
use super::region::Region;
use super::rng::{self, stream};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Integer cell (or lattice site) index.
pub type CellKey = SmallVec<[i64; 3]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Substrate {
    Continuum,
    Lattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeCutoff<T> {
    Finite(T),
    Unbounded,
}

impl<T: Scalar> TimeCutoff<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            TimeCutoff::Finite(t) => Some(t),
            TimeCutoff::Unbounded => None,
        }
    }
}

/// Lazily generated Poisson input keyed by `(master_seed, cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField<T: Scalar> {
    master_seed: u64,
    dim: usize,
    substrate: Substrate,
    cutoff: TimeCutoff<T>,
    cell_size: T,
    mark_count: Option<u32>,
}

impl<T: Scalar> CellField<T> {
    pub fn new(master_seed: u64, dim: usize, substrate: Substrate, cutoff: TimeCutoff<T>, cell_size: T) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if !(cell_size >= T::lit(2.0)) || !cell_size.is_finite() {
            return Err(Error::Config(format!("cell size {cell_size} is smaller than the interaction diameter 2")));
        }
        match (substrate, cutoff) {
            (Substrate::Continuum, TimeCutoff::Unbounded) => {
                return Err(Error::Config("continuum input needs a finite time cutoff".into()))
            }
            (Substrate::Continuum, TimeCutoff::Finite(tau)) if !(tau > T::zero()) || !tau.is_finite() => {
                return Err(Error::Config(format!("time cutoff {tau} must be positive")))
            }
            (Substrate::Lattice, TimeCutoff::Finite(_)) => return Err(Error::Config("lattice input is unbounded in time".into())),
            _ => {}
        }
        Ok(CellField { master_seed, dim, substrate, cutoff, cell_size, mark_count: None })
    }

    /// Continuum field with the default cell size 2.
    pub fn continuum(master_seed: u64, dim: usize, tau: T) -> Result<Self> {
        Self::new(master_seed, dim, Substrate::Continuum, TimeCutoff::Finite(tau), T::lit(2.0))
    }

    pub fn lattice(master_seed: u64, dim: usize) -> Result<Self> {
        Self::new(master_seed, dim, Substrate::Lattice, TimeCutoff::Unbounded, T::lit(2.0))
    }

    /// Attach uniformly distributed type marks `0..count` to every point.
    pub fn with_marks(mut self, count: u32) -> Self {
        self.mark_count = (count > 0).then_some(count);
        self
    }

    /// Same configuration, different realisation.
    pub fn reseeded(&self, master_seed: u64) -> Self {
        CellField { master_seed, ..self.clone() }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn substrate(&self) -> Substrate {
        self.substrate
    }
    pub fn cutoff(&self) -> TimeCutoff<T> {
        self.cutoff
    }
    pub fn cell_size(&self) -> T {
        self.cell_size
    }
    pub fn mark_count(&self) -> Option<u32> {
        self.mark_count
    }

    /// Time cutoff of a continuum field.
    pub fn tau(&self) -> Result<T> {
        self.cutoff.finite().ok_or(Error::Mode { expected: "finite-time continuum" })
    }

    fn require_continuum(&self) -> Result<T> {
        if self.substrate != Substrate::Continuum {
            return Err(Error::Mode { expected: "continuum" });
        }
        self.tau()
    }

    fn require_lattice(&self) -> Result<()> {
        if self.substrate != Substrate::Lattice {
            return Err(Error::Mode { expected: "lattice" });
        }
        Ok(())
    }

    pub fn cell_of(&self, x: &[T]) -> CellKey {
        x.iter().map(|&c| (c / self.cell_size).floor().to_i64().unwrap_or(i64::MAX)).collect()
    }

    /// Points of one cell, sorted by arrival. Count is Poisson with mean
    /// `cell_size^d * tau`, positions and times uniform.
    pub fn cell_points(&self, cell: &[i64]) -> Result<Vec<SpaceTimePoint<T>>> {
        let tau = self.require_continuum()?;
        if cell.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: cell.len() });
        }
        let h = self.cell_size.as_f64();
        let tau_f = tau.as_f64();
        let mut r = rng::stream_rng(rng::key(self.master_seed, stream::CELL, cell));
        let mean = h.powi(self.dim as i32) * tau_f;
        let n = Poisson::new(mean).map_err(|e| Error::Numerical(format!("poisson mean {mean}: {e}")))?.sample(&mut r) as u64;
        let mut pts = Vec::with_capacity(n as usize);
        for i in 0..n {
            let x: Coord<T> = cell
                .iter()
                .map(|&c| {
                    let v = T::lit((c as f64 + r.random::<f64>()) * h);
                    let upper = T::lit((c + 1) as f64 * h);
                    // rounding into the next cell is possible in f32
                    if v >= upper {
                        upper - upper.abs().max(T::one()) * T::epsilon()
                    } else {
                        v
                    }
                })
                .collect();
            let t = T::lit(r.random::<f64>() * tau_f);
            let tag = rng::key(self.master_seed, stream::TAG, &tag_words(cell, i));
            let mut p = SpaceTimePoint { x, t, mark: None, lifetime: None, tag: Some(tag) };
            if let Some(k) = self.mark_count {
                p.mark = Some(self.mark_for(tag, k));
            }
            pts.push(p);
        }
        pts.sort_by(|a, b| a.arrival_cmp(b));
        Ok(pts)
    }

    fn mark_for(&self, tag: u64, count: u32) -> u32 {
        let u = rng::unit_open(rng::key(self.master_seed, stream::MARK, &[tag as i64]));
        ((u * count as f64) as u32).min(count - 1)
    }

    /// Exponential lifetime with the given rate from the point's own
    /// substream; `None` (never desorbs) for rate 0 or untagged points.
    pub fn lifetime_for(&self, p: &SpaceTimePoint<T>, rate: f64) -> Option<T> {
        if rate <= 0.0 {
            return None;
        }
        let tag = p.tag?;
        let u = rng::unit_open(rng::key(self.master_seed, stream::LIFETIME, &[tag as i64]));
        Some(T::lit(-u.ln() / rate))
    }

    /// Cells meeting any box of the region, in lexicographic order.
    pub fn cells_meeting(&self, region: &Region<T>) -> BTreeSet<CellKey> {
        let mut out = BTreeSet::new();
        for b in region.boxes() {
            let lo = self.cell_of(&b.lower);
            // Boxes are half-open; nudge the upper corner inwards.
            let hi: CellKey = b
                .upper
                .iter()
                .map(|&u| {
                    let q = u / self.cell_size;
                    let f = q.floor();
                    let c = if f == q { f - T::one() } else { f };
                    c.to_i64().unwrap_or(i64::MAX)
                })
                .collect();
            for_each_in_range(&lo, &hi, |k| {
                out.insert(k.clone());
            });
        }
        out
    }

    /// The field restricted to `region`, globally sorted by arrival.
    pub fn sample_window(&self, region: &Region<T>) -> Result<Vec<SpaceTimePoint<T>>> {
        self.require_continuum()?;
        if let Some(d) = region.dim() {
            if d != self.dim {
                return Err(Error::Dimension { expected: self.dim, got: d });
            }
        }
        let mut pts = Vec::new();
        for cell in self.cells_meeting(region) {
            pts.extend(self.cell_points(&cell)?.into_iter().filter(|p| region.contains(&p.x)));
        }
        pts.sort_by(|a, b| a.arrival_cmp(b));
        Ok(pts)
    }

    /// Unit-rate arrival times at a lattice site up to `horizon`. Gaps are
    /// drawn sequentially from the site's stream, so a longer horizon only
    /// appends.
    pub fn lattice_arrivals(&self, site: &[i64], horizon: T) -> Result<Vec<T>> {
        self.require_lattice()?;
        if site.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: site.len() });
        }
        if !(horizon > T::zero()) {
            return Err(Error::Config("horizon must be positive".into()));
        }
        let mut r = rng::stream_rng(rng::key(self.master_seed, stream::LATTICE, site));
        let horizon = horizon.as_f64();
        let mut t = 0.0;
        let mut out = Vec::new();
        loop {
            t += exp1(&mut r);
            if t > horizon {
                return Ok(out);
            }
            out.push(T::lit(t));
        }
    }

    /// First arrival time at a lattice site (its jamming priority).
    pub fn first_arrival(&self, site: &[i64]) -> T {
        let mut r = rng::stream_rng(rng::key(self.master_seed, stream::LATTICE, site));
        T::lit(exp1(&mut r))
    }
}

fn exp1<R: Rng>(r: &mut R) -> f64 {
    // 1 - U lies in (0, 1]
    -(1.0 - r.random::<f64>()).ln()
}

fn tag_words(cell: &[i64], index: u64) -> CellKey {
    let mut w: CellKey = cell.iter().copied().collect();
    w.push(index as i64);
    w
}

/// Visits every integer vector in the inclusive box `[lo, hi]`.
pub(crate) fn for_each_in_range(lo: &[i64], hi: &[i64], mut f: impl FnMut(&CellKey)) {
    if lo.iter().zip(hi).any(|(l, h)| h < l) {
        return;
    }
    let mut cur: CellKey = lo.iter().copied().collect();
    loop {
        f(&cur);
        let mut i = 0;
        loop {
            if i == cur.len() {
                return;
            }
            if cur[i] < hi[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = lo[i];
            i += 1;
        }
    }
}
