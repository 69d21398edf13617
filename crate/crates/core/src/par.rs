//! Map helpers that fan independent jobs out to rayon when the `parallel`
//! feature is enabled and fall back to a plain sequential loop otherwise.
//! Results always come back in input order, so reductions downstream are
//! deterministic either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map over items in parallel (ordered collect) or sequentially.
#[cfg(feature = "parallel")]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Always-sequential map; the benchmark suite compares this against `par_map`.
pub fn seq_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Configure the global rayon pool size; no-op without the `parallel` feature.
#[cfg(feature = "parallel")]
pub fn configure_threads(jobs: usize) {
    if jobs > 0 {
        // Ignore the error if a pool is already installed.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_jobs: usize) {}
