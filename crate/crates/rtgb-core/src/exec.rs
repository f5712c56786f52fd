//! Pluggable work-item execution.
//!
//! Heavy loops (contrastive-divergence steps, Gibbs chains, sequence
//! simulation) map an index range through a pure closure and collect the
//! results in index order. `Serial` runs them inline; a thread-pool
//! implementation can run them concurrently without changing any result,
//! because each item derives its own random stream and the reduction order
//! is fixed by the returned `Vec`.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Evaluate `f(0), f(1), ..., f(n-1)` and return the results in order.
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Runs every item on the calling thread.
#[derive(Debug, Default, Clone, Copy)]
pub struct Serial;

impl Executor for Serial {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..n).map(f).collect()
    }
}
