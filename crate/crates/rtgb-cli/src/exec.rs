//! Thread-pool execution of core work items.
//!
//! Wraps a rayon pool behind the core `Executor` trait. Results come back
//! in index order and every item derives its own random stream, so output
//! is byte-identical regardless of the thread count.

use rayon::prelude::*;
use rtgb_core::exec::Executor;

/// Runs work items on a dedicated rayon pool.
pub struct ThreadPoolExec {
    pool: rayon::ThreadPool,
}

impl ThreadPoolExec {
    /// Build a pool with `threads` workers (at least 1).
    pub fn new(threads: usize) -> anyhow::Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()?;
        Ok(ThreadPoolExec { pool })
    }
}

impl Executor for ThreadPoolExec {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        let f = &f;
        self.pool
            .install(|| (0..n).into_par_iter().map(|i| f(i)).collect())
    }
}
