//! Jamming of the lattice packing under infinite input.
//!
//! With unlimited arrivals the final configuration depends only on the
//! first arrival at each site: a site is occupied iff every lower-priority
//! (earlier) site within Euclidean distance `< 2` ends up empty. Decisions
//! are made lazily by depth-first recursion along strictly decreasing
//! priorities, memoised across queries.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::input::{CellField, CellKey, Region};
use crate::scalar::Scalar;

/// Nonzero integer offsets `o` with `|o| < 2`: the exclusion neighbourhood
/// (2 sites in d = 1, 8 in d = 2, 26 in d = 3).
pub fn lattice_neighbour_offsets(d: usize) -> Vec<CellKey> {
    let mut out = Vec::new();
    crate::input::for_each_in_range(&vec![-1; d], &vec![1; d], |k| {
        let n2: i64 = k.iter().map(|c| c * c).sum();
        if n2 > 0 && n2 < 4 {
            out.push(k.clone());
        }
    });
    out
}

/// Memoised random-priority jammer over an arbitrary site set.
pub struct LatticeJammer<P, E> {
    priority: P,
    exists: E,
    offsets: Vec<CellKey>,
    memo: HashMap<CellKey, bool>,
    prio_cache: HashMap<CellKey, f64>,
    anchor: Option<(CellKey, CellKey)>,
    cap: i64,
}

impl<P, E> LatticeJammer<P, E>
where
    P: FnMut(&[i64]) -> f64,
    E: Fn(&[i64]) -> bool,
{
    /// `priority` gives each site's first arrival time, `exists` restricts
    /// the substrate (free boundary outside). Visiting a site farther than
    /// `cap` (Chebyshev) from the anchor box is an error; the anchor
    /// defaults to the first queried site.
    pub fn new(dim: usize, priority: P, exists: E, cap: i64) -> Self {
        LatticeJammer {
            priority,
            exists,
            offsets: lattice_neighbour_offsets(dim),
            memo: HashMap::new(),
            prio_cache: HashMap::new(),
            anchor: None,
            cap,
        }
    }

    pub fn with_anchor(mut self, lo: &[i64], hi: &[i64]) -> Self {
        self.anchor = Some((CellKey::from_slice(lo), CellKey::from_slice(hi)));
        self
    }

    pub fn priority(&mut self, site: &[i64]) -> f64 {
        if let Some(&p) = self.prio_cache.get(site) {
            return p;
        }
        let p = (self.priority)(site);
        self.prio_cache.insert(CellKey::from_slice(site), p);
        p
    }

    /// Existing neighbours with earlier first arrival, earliest first.
    fn lower_neighbours(&mut self, site: &CellKey) -> Result<Vec<CellKey>> {
        let own = self.priority(site);
        let mut out = Vec::new();
        for o in self.offsets.clone() {
            let y: CellKey = site.iter().zip(&o).map(|(a, b)| a + b).collect();
            if !(self.exists)(&y) {
                continue;
            }
            if let Some((lo, hi)) = &self.anchor {
                let far = (0..y.len()).map(|i| (lo[i] - y[i]).max(y[i] - hi[i])).max().unwrap_or(0);
                if far > self.cap {
                    return Err(Error::ExplorationCap { cap: self.cap });
                }
            }
            let p = self.priority(&y);
            if p < own {
                out.push((p, y));
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(out.into_iter().map(|(_, y)| y).collect())
    }

    /// Whether `site` is occupied in the jammed configuration.
    pub fn occupied(&mut self, site: &[i64]) -> Result<bool> {
        let site = CellKey::from_slice(site);
        if let Some(&v) = self.memo.get(&site) {
            return Ok(v);
        }
        if self.anchor.is_none() {
            self.anchor = Some((site.clone(), site.clone()));
        }
        let mut stack = vec![site.clone()];
        while let Some(s) = stack.last().cloned() {
            if self.memo.contains_key(&s) {
                stack.pop();
                continue;
            }
            let mut pending = None;
            let mut blocked = false;
            for y in self.lower_neighbours(&s)? {
                match self.memo.get(&y) {
                    Some(true) => {
                        blocked = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        pending = Some(y);
                        break;
                    }
                }
            }
            if blocked {
                self.memo.insert(s, false);
                stack.pop();
            } else if let Some(y) = pending {
                stack.push(y);
            } else {
                self.memo.insert(s, true);
                stack.pop();
            }
        }
        Ok(self.memo[&site])
    }

    /// Earliest first-arrival among occupied sites of the closed
    /// neighbourhood of `site`: a ball inserted at `site` at time `t` is
    /// accepted iff `t <= block_time`.
    pub fn block_time(&mut self, site: &[i64]) -> Result<f64> {
        let mut best = f64::INFINITY;
        let mut sites = vec![CellKey::from_slice(site)];
        for o in &self.offsets {
            sites.push(site.iter().zip(o).map(|(a, b)| a + b).collect());
        }
        for y in sites {
            if (self.exists)(&y) && self.occupied(&y)? {
                best = best.min(self.priority(&y));
            }
        }
        Ok(best)
    }
}

/// Jam a finite site set with explicit priorities (free boundary).
pub fn jam_sites(sites: &[(CellKey, f64)]) -> Result<Vec<CellKey>> {
    let Some(d) = sites.first().map(|(s, _)| s.len()) else {
        return Ok(Vec::new());
    };
    let table: HashMap<CellKey, f64> = sites.iter().cloned().collect();
    let mut j = LatticeJammer::new(d, |s: &[i64]| table[s], |s: &[i64]| table.contains_key(s), i64::MAX);
    let mut out = Vec::new();
    for (s, _) in sites {
        if j.occupied(s)? {
            out.push(s.clone());
        }
    }
    out.sort();
    Ok(out)
}

/// Integer sites inside a region, lexicographically ordered.
pub(crate) fn sites_in<T: Scalar>(region: &Region<T>) -> Vec<CellKey> {
    let mut out = std::collections::BTreeSet::new();
    for b in region.boxes() {
        let lo: Vec<i64> = b.lower.iter().map(|c| c.ceil().to_i64().unwrap_or(i64::MIN)).collect();
        let hi: Vec<i64> = b
            .upper
            .iter()
            .map(|c| {
                let f = c.floor();
                (if f == *c { f - T::one() } else { f }).to_i64().unwrap_or(i64::MAX)
            })
            .collect();
        crate::input::for_each_in_range(&lo, &hi, |k| {
            out.insert(k.clone());
        });
    }
    out.into_iter().collect()
}

/// Occupied sites of the infinite-input lattice packing inside `window`.
/// `restrict_to`, when given, removes every site outside it from the
/// substrate (finite-volume packing on that set).
pub fn jam_lattice_window<T: Scalar>(field: &CellField<T>, window: &Region<T>, restrict_to: Option<&Region<T>>) -> Result<Vec<CellKey>> {
    field.lattice_arrivals(&vec![0; field.dim()], T::one())?;
    let exists = |s: &[i64]| {
        restrict_to.is_none_or(|r| {
            let x: Vec<T> = s.iter().map(|&c| T::lit(c as f64)).collect();
            r.contains(&x)
        })
    };
    let sites = sites_in(window);
    let Some(mut j) = window_jammer(field, &sites, exists) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for site in sites {
        if (j.exists)(&site) && j.occupied(&site)? {
            out.push(site);
        }
    }
    Ok(out)
}

const LATTICE_CAP: i64 = 200;

fn window_jammer<'f, T: Scalar, E: Fn(&[i64]) -> bool>(
    field: &'f CellField<T>,
    sites: &[CellKey],
    exists: E,
) -> Option<LatticeJammer<impl FnMut(&[i64]) -> f64 + 'f, E>> {
    let first = sites.first()?;
    let (mut lo, mut hi) = (first.clone(), first.clone());
    for s in sites {
        for i in 0..s.len() {
            lo[i] = lo[i].min(s[i]);
            hi[i] = hi[i].max(s[i]);
        }
    }
    let prio = move |s: &[i64]| field.first_arrival(s).as_f64();
    Some(LatticeJammer::new(field.dim(), prio, exists, LATTICE_CAP).with_anchor(&lo, &hi))
}

/// For every site of `window`: the latest time at which a ball arriving
/// there would still be accepted under infinite input (the earliest first
/// arrival among occupied sites of its closed neighbourhood).
pub fn lattice_block_times<T: Scalar>(field: &CellField<T>, window: &Region<T>) -> Result<Vec<(CellKey, f64)>> {
    field.lattice_arrivals(&vec![0; field.dim()], T::one())?;
    let sites = sites_in(window);
    let Some(mut j) = window_jammer(field, &sites, |_: &[i64]| true) else {
        return Ok(Vec::new());
    };
    sites.into_iter().map(|s| Ok((s.clone(), j.block_time(&s)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::Aabb;

    fn k(v: &[i64]) -> CellKey {
        CellKey::from_slice(v)
    }

    #[test]
    fn neighbourhood_sizes() {
        assert_eq!(lattice_neighbour_offsets(1).len(), 2);
        assert_eq!(lattice_neighbour_offsets(2).len(), 8);
        assert_eq!(lattice_neighbour_offsets(3).len(), 26);
    }

    #[test]
    fn three_site_fixture() {
        let sites = vec![(k(&[0]), 0.2), (k(&[1]), 0.5), (k(&[2]), 0.1)];
        assert_eq!(jam_sites(&sites).unwrap(), vec![k(&[0]), k(&[2])]);
    }

    #[test]
    fn single_site() {
        assert_eq!(jam_sites(&[(k(&[4, 4]), 3.0)]).unwrap(), vec![k(&[4, 4])]);
    }

    #[test]
    fn jammed_window_is_maximal_and_hard_core() {
        let f = CellField::<f64>::lattice(12, 2).unwrap();
        let w = Region::from_box(Aabb::new(&[0.0, 0.0], &[20.0, 20.0]).unwrap());
        let occ: std::collections::HashSet<CellKey> = jam_lattice_window(&f, &w, None).unwrap().into_iter().collect();
        let offs = lattice_neighbour_offsets(2);
        for s in sites_in(&w) {
            let nb: Vec<CellKey> = offs.iter().map(|o| k(&[s[0] + o[0], s[1] + o[1]])).collect();
            let inner = s.iter().all(|&c| (1..19).contains(&c));
            if occ.contains(&s) {
                assert!(nb.iter().all(|y| !occ.contains(y)), "adjacent occupied sites at {s:?}");
            } else if inner {
                assert!(nb.iter().any(|y| occ.contains(y)), "addable site {s:?}");
            }
        }
    }

    #[test]
    fn priority_rule_consistency() {
        let f = CellField::<f64>::lattice(3, 1).unwrap();
        let w = Region::from_box(Aabb::new(&[-30.0], &[30.0]).unwrap());
        let occ = jam_lattice_window(&f, &w, None).unwrap();
        for s in sites_in(&w).into_iter().filter(|s| s[0].abs() < 29) {
            let p = f.first_arrival(&s);
            let blocked = [-1, 1].iter().any(|o| {
                let y = k(&[s[0] + o]);
                f.first_arrival(&y) < p && occ.contains(&y)
            });
            assert_eq!(occ.contains(&s), !blocked);
        }
    }

    #[test]
    fn block_time_bounds_the_sites_own_clock() {
        let f = CellField::<f64>::lattice(8, 2).unwrap();
        for x in 0..50 {
            let mut j = LatticeJammer::new(2, |s: &[i64]| f.first_arrival(s), |_: &[i64]| true, 200);
            let bt = j.block_time(&[x, 0]).unwrap();
            assert!(bt <= f.first_arrival(&[x, 0]));
        }
    }

    #[test]
    fn finite_substrate_boundary() {
        let f = CellField::<f64>::lattice(5, 1).unwrap();
        let a = Region::from_box(Aabb::new(&[0.0], &[3.0]).unwrap());
        let occ = jam_lattice_window(&f, &a, Some(&a)).unwrap();
        let sites: Vec<(CellKey, f64)> = (0..3).map(|i| (k(&[i]), f.first_arrival(&[i]))).collect();
        assert_eq!(occ, jam_sites(&sites).unwrap());
    }
}
