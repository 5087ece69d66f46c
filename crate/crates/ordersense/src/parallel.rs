//! Multi-threaded executor for the Monte Carlo engine.

use ordersense_core::montecarlo::Executor;
use rayon::prelude::*;

/// Maps over rows on the rayon pool. Output order is the index order, so
/// results match [`ordersense_core::montecarlo::Sequential`] bit for bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct Parallel;

impl Executor for Parallel {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).into_par_iter().map(f).collect()
    }
}
