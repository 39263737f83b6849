//! Worker pool sized by `GFX_THREADS` (default: available parallelism).

use std::num::NonZeroUsize;

pub fn worker_count() -> usize {
    std::env::var("GFX_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, NonZeroUsize::get))
}

/// Runs `f` inside a rayon pool of `worker_count()` threads.
pub fn run<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
