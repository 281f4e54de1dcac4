//! Running independent Monte Carlo trials.
//!
//! [`map_trials`] uses a rayon pool when the `parallel` feature is enabled
//! and a plain loop otherwise. Results are always in trial order, and each
//! trial derives its randomness from its index, so both paths return the same
//! values.

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "QCOUNT_THREADS";

/// Worker count requested through `QCOUNT_THREADS`, if set and positive.
pub fn configured_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Evaluates `f(0), …, f(count − 1)` in order on the current thread.
pub fn map_trials_sequential<T, F>(count: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..count).map(f).collect()
}

/// Evaluates `f(0), …, f(count − 1)` on a rayon pool, keeping trial order.
#[cfg(feature = "parallel")]
pub fn map_trials_parallel<T, F>(count: u64, threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;

    let run = || (0..count).into_par_iter().map(&f).collect::<Vec<T>>();
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    }
}

/// Evaluates every trial, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map_trials<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    if configured_threads() == Some(1) {
        return map_trials_sequential(count, f);
    }
    map_trials_parallel(count, configured_threads(), f)
}

/// Evaluates every trial, in parallel when the `parallel` feature is on.
#[cfg(not(feature = "parallel"))]
pub fn map_trials<T, F>(count: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    map_trials_sequential(count, f)
}
