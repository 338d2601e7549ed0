//! Adsorption with finite residence times.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::rsa::BallGrid;
use super::{PackedSample, Provenance, Rule};
use crate::error::{Error, Result};
use crate::input::{CellField, Region, SpaceTimePoint, Substrate};
use crate::scalar::Scalar;

/// One step of the event sweep, in processing order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesorptionEvent {
    Arrival { time: f64, index: usize, accepted: bool },
    Departure { time: f64, index: usize },
}

#[derive(Clone, Copy)]
struct Ord64(f64);
impl PartialEq for Ord64 {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o).is_eq()
    }
}
impl Eq for Ord64 {}
impl PartialOrd for Ord64 {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Ord64 {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// Event sweep over arrival-sorted points carrying optional lifetimes
/// (`None` = never leaves). Returns which points are present at `horizon`
/// and the event log. A departure at the same instant as an arrival is
/// processed first.
pub fn desorb_sequential<T: Scalar>(points: &[SpaceTimePoint<T>], horizon: T) -> Result<(Vec<bool>, Vec<DesorptionEvent>)> {
    if let Some(i) = points.windows(2).position(|w| w[0].arrival_cmp(&w[1]).is_gt()) {
        return Err(Error::Unsorted(i + 1));
    }
    let mut grid = BallGrid::new(T::lit(2.0));
    let four = T::lit(4.0);
    let mut present = vec![false; points.len()];
    let mut leaving: BinaryHeap<Reverse<(Ord64, usize)>> = BinaryHeap::new();
    let mut log = Vec::new();
    let depart = |grid: &mut BallGrid<T>, present: &mut [bool], log: &mut Vec<DesorptionEvent>, time: f64, j: usize| {
        grid.remove(j);
        present[j] = false;
        log.push(DesorptionEvent::Departure { time, index: j });
    };
    for (i, p) in points.iter().enumerate() {
        if p.t > horizon {
            break;
        }
        let now = p.t.as_f64();
        while let Some(&Reverse((Ord64(time), j))) = leaving.peek() {
            if time > now {
                break;
            }
            leaving.pop();
            depart(&mut grid, &mut present, &mut log, time, j);
        }
        let ok = !grid.any_within(&p.x, four);
        log.push(DesorptionEvent::Arrival { time: now, index: i, accepted: ok });
        if ok {
            grid.insert(i, &p.x);
            present[i] = true;
            if let Some(l) = p.lifetime {
                leaving.push(Reverse((Ord64((p.t + l).as_f64()), i)));
            }
        }
    }
    let h = horizon.as_f64();
    while let Some(Reverse((Ord64(time), j))) = leaving.pop() {
        if time > h {
            break;
        }
        depart(&mut grid, &mut present, &mut log, time, j);
    }
    Ok((present, log))
}

/// Desorption dynamics on the field restricted to `region`; lifetimes are
/// exponential with `lifetime_rate` (0 = permanent adsorption). Flags mark
/// balls present at the cutoff.
pub fn simulate_desorption<T: Scalar>(field: &CellField<T>, region: &Region<T>, lifetime_rate: f64) -> Result<PackedSample<T>> {
    let tau = field.tau()?;
    if !(lifetime_rate >= 0.0) {
        return Err(Error::Config("lifetime rate must be nonnegative".into()));
    }
    let mut points = field.sample_window(region)?;
    for p in &mut points {
        p.lifetime = field.lifetime_for(p, lifetime_rate);
    }
    let (accepted, _) = desorb_sequential(&points, tau)?;
    Ok(PackedSample {
        points,
        accepted,
        rule: Rule::Desorption { rate: lifetime_rate, horizon: tau.as_f64() },
        provenance: Some(Provenance { seed: field.master_seed(), region: region.clone(), substrate: Substrate::Continuum }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::Aabb;
    use crate::packing::{check_hard_core, pack_sequential};

    #[test]
    fn hand_sweep() {
        let pts = vec![SpaceTimePoint::new(&[0.0], 0.1).with_lifetime(0.05), SpaceTimePoint::new(&[0.5], 0.2)];
        let (present, log) = desorb_sequential(&pts, 1.0).unwrap();
        assert_eq!(present, vec![false, true]);
        assert!(matches!(log[0], DesorptionEvent::Arrival { accepted: true, .. }));
        assert!(matches!(log[1], DesorptionEvent::Departure { index: 0, time } if (time - 0.15).abs() < 1e-12));
        assert!(matches!(log[2], DesorptionEvent::Arrival { index: 1, accepted: true, .. }));
    }

    #[test]
    fn zero_rate_is_plain_packing() {
        for s in 0..10 {
            let f = CellField::<f64>::continuum(s, 2, 2.0).unwrap();
            let r = Region::from_box(Aabb::new(&[0.0, 0.0], &[15.0, 15.0]).unwrap());
            let d = simulate_desorption(&f, &r, 0.0).unwrap();
            let p = pack_sequential(f.sample_window(&r).unwrap()).unwrap();
            assert_eq!(d.accepted, p.accepted);
        }
    }

    // replay the log against a brute-force present set
    #[test]
    fn present_set_is_hard_core_at_every_event() {
        let f = CellField::<f64>::continuum(4, 1, 3.0).unwrap();
        let r = Region::from_box(Aabb::new(&[0.0], &[40.0]).unwrap());
        let mut pts = f.sample_window(&r).unwrap();
        for p in &mut pts {
            p.lifetime = f.lifetime_for(p, 2.0);
        }
        let (present, log) = desorb_sequential(&pts, 3.0).unwrap();
        let mut now: Vec<usize> = Vec::new();
        let mut departures = 0;
        for e in log {
            match e {
                DesorptionEvent::Arrival { index, accepted, .. } => {
                    let free = now.iter().all(|&j| (pts[j].x[0] - pts[index].x[0]).abs() >= 2.0);
                    assert_eq!(free, accepted);
                    if accepted {
                        now.push(index);
                    }
                }
                DesorptionEvent::Departure { index, .. } => {
                    departures += 1;
                    now.retain(|&j| j != index);
                }
            }
            assert!(check_hard_core(now.iter().map(|&j| &pts[j])));
        }
        assert!(departures > 0);
        now.sort_unstable();
        let expect: Vec<usize> = (0..pts.len()).filter(|&i| present[i]).collect();
        assert_eq!(now, expect);
    }
}
