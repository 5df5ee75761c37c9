//! Deterministic Monte Carlo fan-out.

use rayon::prelude::*;

use crate::rng::RngStream;

/// Runs `f` over `n` independent paths, path `i` drawing from stream
/// `(seed, i)`. Results are identical for every `workers` value (including 1)
/// because streams are tied to path indices, not threads, and collection
/// preserves index order.
pub fn par_paths<T, F>(n: usize, workers: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RngStream) -> T + Sync,
{
    if workers <= 1 {
        return (0..n)
            .map(|i| {
                let mut rng = RngStream::new(seed, i as u64);
                f(&mut rng)
            })
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("worker pool");
    pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(seed, i as u64);
                f(&mut rng)
            })
            .collect()
    })
}
