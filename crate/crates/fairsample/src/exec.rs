//! Data-parallel execution helpers.
//!
//! Work is always partitioned into independent items with their own random
//! streams and collected in item order, so the parallel and sequential paths
//! produce identical results.  The `parallel` feature (on by default) runs
//! items on the rayon pool; without it the same helpers degrade to plain
//! iteration.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n` sequentially, collecting results in index order.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Maps `f` over `0..n` on the rayon pool, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed_par<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n`, parallel when the feature is enabled.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_indexed_par(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_seq(n, f)
    }
}

/// Configures the global rayon pool to `workers` threads.  A no-op without
/// the `parallel` feature or when called more than once.
pub fn configure_workers(workers: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(w) = workers {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
}
