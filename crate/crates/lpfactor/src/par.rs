//! Data-parallel helpers. With the `parallel` feature (on by default) work is
//! spread over a rayon pool; without it, or when a caller opts out at runtime,
//! the same closures run sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Runs `f` for indices `0..n`, in parallel when both the feature and the
/// runtime flag allow it, and collects the results in index order.
pub(crate) fn map_indexed<R, F>(n: u32, parallel: bool, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u32) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, in parallel when allowed.
pub(crate) fn map_slice<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return items.par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    items.iter().map(f).collect()
}
