//! Data-parallel helpers. With the `parallel` feature these fan out over the
//! rayon pool; without it they run the same closures sequentially. Results
//! are always returned in index order so both builds produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f).collect()`, possibly in parallel.
#[cfg(feature = "parallel")]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn sort_f64(v: &mut [f64]) {
    v.par_sort_unstable_by(f64::total_cmp);
}

#[cfg(not(feature = "parallel"))]
pub fn sort_f64(v: &mut [f64]) {
    v.sort_unstable_by(f64::total_cmp);
}

/// Run `f` with at most `jobs` worker threads.
#[cfg(feature = "parallel")]
pub fn with_jobs<T: Send, F: FnOnce() -> T + Send>(jobs: usize, f: F) -> T {
    match rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
    {
        Ok(pool) => pool.install(f),
        Err(e) => {
            log::warn!("could not build a {jobs}-thread pool ({e}); using the global pool");
            f()
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_jobs<T: Send, F: FnOnce() -> T + Send>(_jobs: usize, f: F) -> T {
    f()
}

pub const fn enabled() -> bool {
    cfg!(feature = "parallel")
}
