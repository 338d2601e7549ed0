//! Replicate fan-out. Work runs on the ambient rayon pool; results come
//! back in replicate order, so aggregation never depends on scheduling.

use rayon::prelude::*;

use crate::error::Result;
use crate::input::rng::derive_seed;
use crate::input::CellField;
use crate::scalar::Scalar;

/// `f(0..n)` in parallel, collected in index order. The first error (by
/// index) wins.
pub fn replicate_map<R, F>(n: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> Result<R> + Sync + Send,
{
    let all: Vec<Result<R>> = (0..n).into_par_iter().map(f).collect();
    all.into_iter().collect()
}

/// Field of replicate `i`: same geometry, seed derived from the base seed.
pub fn replicate_field<T: Scalar>(base: &CellField<T>, i: usize) -> CellField<T> {
    base.reseeded(derive_seed(base.master_seed(), i as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn order_and_errors_are_deterministic() {
        let v = replicate_map(1000, |i| Ok(i * 2)).unwrap();
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
        let e = replicate_map(100, |i| if i % 30 == 29 { Err(Error::Numerical(format!("{i}"))) } else { Ok(i) });
        assert_eq!(e.unwrap_err(), Error::Numerical("29".into()));
    }

    #[test]
    fn pool_size_does_not_matter() {
        let run = |k| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .unwrap()
                .install(|| replicate_map(200, |i| Ok(derive_seed(5, i as u64))).unwrap())
        };
        assert_eq!(run(1), run(8));
    }
}
