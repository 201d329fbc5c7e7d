//! Row-level execution helpers.
//!
//! With the `parallel` feature the helpers dispatch onto the rayon pool,
//! otherwise they run on the calling thread. Every helper writes its results
//! into fixed positions and reduces partial sums in ascending index order, so
//! the numbers produced are bit-identical with and without the feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fills `out` row by row; `f(r, row)` must compute row `r` of the output.
pub(crate) fn fill_rows<F>(out: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Send + Sync,
{
    #[cfg(feature = "parallel")]
    out.par_chunks_mut(width)
        .enumerate()
        .for_each(|(r, row)| f(r, row));
    #[cfg(not(feature = "parallel"))]
    out.chunks_mut(width)
        .enumerate()
        .for_each(|(r, row)| f(r, row));
}

/// Sums `f(row)` over the rows of `data`, reducing in row order.
pub(crate) fn sum_rows<F>(data: &[f64], width: usize, f: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    #[cfg(feature = "parallel")]
    let partial: Vec<f64> = data.par_chunks(width).map(&f).collect();
    #[cfg(not(feature = "parallel"))]
    let partial: Vec<f64> = data.chunks(width).map(&f).collect();
    partial.into_iter().sum()
}

/// Ordered map over a slice.
pub(crate) fn map_ordered<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Send + Sync,
{
    #[cfg(feature = "parallel")]
    return items.par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return items.iter().map(f).collect();
}

/// Rewrites each row in place with `f`, returning the row-ordered sum of the
/// values `f` reports.
pub(crate) fn transform_rows<F>(data: &mut [f64], width: usize, f: F) -> f64
where
    F: Fn(&mut [f64]) -> f64 + Send + Sync,
{
    #[cfg(feature = "parallel")]
    let partial: Vec<f64> = data.par_chunks_mut(width).map(&f).collect();
    #[cfg(not(feature = "parallel"))]
    let partial: Vec<f64> = data.chunks_mut(width).map(&f).collect();
    partial.into_iter().sum()
}
