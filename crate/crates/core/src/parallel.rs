//! Order-preserving map, parallel when the `parallel` feature is on.
//!
//! Results are always collected in input order, so reductions done by the
//! caller afterwards are bit-reproducible for any thread count.

#[cfg(feature = "parallel")]
pub(crate) fn ordered_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn ordered_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Like [`ordered_map`] over `0..n`, stopping at the first error in index order.
pub(crate) fn try_map_indices<R, E, F>(n: usize, f: F) -> Result<Vec<R>, E>
where
    R: Send,
    E: Send,
    F: Fn(usize) -> Result<R, E> + Sync + Send,
{
    let idx: Vec<usize> = (0..n).collect();
    ordered_map(&idx, |&i| f(i)).into_iter().collect()
}
