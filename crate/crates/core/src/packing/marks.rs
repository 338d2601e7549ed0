use super::PackedSample;
use crate::scalar::Scalar;

/// Points carrying `mark`, flags untouched. Unmarked points are dropped.
pub fn filter_by_mark<T: Scalar>(sample: &PackedSample<T>, mark: u32) -> PackedSample<T> {
    let (points, accepted) =
        sample.points.iter().zip(&sample.accepted).filter(|(p, _)| p.mark == Some(mark)).map(|(p, &a)| (p.clone(), a)).unzip();
    PackedSample { points, accepted, rule: sample.rule, provenance: sample.provenance.clone() }
}
