use rayon::prelude::*;

use crate::error::{Error, Result};

/// Runs `job(i)` for `i in 0..count` on `workers` threads and returns the
/// results in index order. The first error by index wins, so the outcome
/// does not depend on scheduling.
pub(crate) fn map_indexed<T, F>(workers: usize, count: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if workers <= 1 {
        return (0..count).map(job).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Internal(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<T>> = pool.install(|| (0..count).into_par_iter().map(&job).collect());
    results.into_iter().collect()
}
