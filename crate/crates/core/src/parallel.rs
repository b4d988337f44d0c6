//! Deterministic parallel map.
//!
//! Work is farmed out per item and collected back in index order, so the
//! result (and any floating-point reduction the caller does over it) is
//! identical for every thread count.

use rayon::prelude::*;

/// Maps `f` over `items`, preserving order. `threads <= 1` stays on the
/// calling thread; otherwise a scoped rayon pool of that size is used.
pub fn map_indexed<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if threads <= 1 || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(|| items.par_iter().map(f).collect())
}
