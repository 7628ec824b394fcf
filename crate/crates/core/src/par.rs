//! Data-parallel helpers. With the `parallel` feature (the default) work is
//! spread over a rayon pool; without it, or with `Parallelism::Sequential`,
//! everything runs on the calling thread in the same order.

use serde::{Deserialize, Serialize};

/// Environment variable holding the worker count for the global pool.
pub const THREADS_ENV: &str = "TORIC_EXC_THREADS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    /// What will actually run: `Parallel` degrades to `Sequential` when the
    /// crate is built without the `parallel` feature.
    pub fn effective(self) -> Parallelism {
        if cfg!(feature = "parallel") {
            self
        } else {
            Parallelism::Sequential
        }
    }
}

/// Sets the global pool size from `TORIC_EXC_THREADS` if it is set. Safe to
/// call more than once; only the first call has an effect.
pub fn init_threads_from_env() {
    #[cfg(feature = "parallel")]
    {
        static ONCE: std::sync::Once = std::sync::Once::new();
        ONCE.call_once(|| {
            let Ok(v) = std::env::var(THREADS_ENV) else { return };
            match v.trim().parse::<usize>() {
                Ok(k) if k > 0 => {
                    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
                        log::warn!("could not size thread pool: {e}");
                    }
                }
                _ => log::warn!("ignoring {THREADS_ENV}={v:?}: expected a positive integer"),
            }
        });
    }
}

/// Order-preserving map over a slice.
pub fn map<T, R, F>(p: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match p.effective() {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Order-preserving map over `0..n`.
pub fn map_range<R, F>(p: Parallelism, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match p.effective() {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Ordered `try_map`: returns the error from the lowest failing index, so the
/// result does not depend on scheduling.
pub fn try_map<T, R, E, F>(p: Parallelism, items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    map(p, items, f).into_iter().collect()
}
