//! Thread-pool plumbing. With the `parallel` feature the heavy loops run on
//! rayon; without it the same entry points fall back to plain sequential code.
//! `LAWSON_THREADS` caps the pool size (unset or 0 means the rayon default).

#[cfg(feature = "parallel")]
use std::sync::OnceLock;

#[cfg(feature = "parallel")]
static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();

#[cfg(feature = "parallel")]
fn pool() -> &'static Option<rayon::ThreadPool> {
    POOL.get_or_init(|| {
        let n = std::env::var("LAWSON_THREADS")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .unwrap_or(0);
        if n == 0 {
            None
        } else {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .expect("rayon pool"),
            )
        }
    })
}

/// Runs `f` inside the configured pool (or the caller's context when uncapped).
#[cfg(feature = "parallel")]
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match pool() {
        Some(p) => p.install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn install<R>(f: impl FnOnce() -> R) -> R {
    f()
}

/// Order-preserving map over owned items, parallel when the feature is on.
#[cfg(feature = "parallel")]
pub fn map_vec<T: Send, R: Send>(items: Vec<T>, f: impl Fn(T) -> R + Send + Sync) -> Vec<R> {
    use rayon::prelude::*;
    install(|| items.into_par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
pub fn map_vec<T, R>(items: Vec<T>, f: impl Fn(T) -> R) -> Vec<R> {
    items.into_iter().map(f).collect()
}

/// True when the parallel code paths are compiled in.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
