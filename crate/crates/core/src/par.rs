//! Trial-level map over `0..trials`, parallel with the `parallel` feature.
//!
//! Outputs are collected in index order, so reductions done afterwards
//! see the same sequence whatever the worker count.

/// Environment variable overriding the number of workers.
pub const WORKERS_ENV: &str = "TRICOK_WORKERS";

/// `(0..trials).map(f)` with per-worker scratch from `init`.
#[cfg(feature = "parallel")]
pub fn map_trials<S, T, I, F>(trials: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..trials).into_par_iter().map_init(init, f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_trials<S, T, I, F>(trials: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    map_trials_seq(trials, init, f)
}

/// Sequential version, always available (benchmarks compare the two).
pub fn map_trials_seq<S, T, I, F>(trials: usize, init: I, f: F) -> Vec<T>
where
    I: Fn() -> S,
    F: Fn(&mut S, usize) -> T,
{
    let mut s = init();
    (0..trials).map(|i| f(&mut s, i)).collect()
}

/// Run `job` with `workers` threads (0 or `None`: library default).
#[cfg(feature = "parallel")]
pub fn with_workers<R: Send>(workers: Option<usize>, job: impl FnOnce() -> R + Send) -> R {
    match workers {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(job),
            Err(_) => job(),
        },
        _ => job(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<R: Send>(_workers: Option<usize>, job: impl FnOnce() -> R + Send) -> R {
    job()
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_kept() {
        let v = with_workers(Some(3), || map_trials(1000, || 0u64, |acc, i| {
            *acc += 1;
            i * i
        }));
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
        assert_eq!(map_trials_seq(5, || (), |_, i| i), vec![0, 1, 2, 3, 4]);
    }
}
