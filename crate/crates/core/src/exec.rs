//! Ordered chunk execution.
//!
//! Level sums are split into independent subtrees whose partial results are
//! folded in ascending order. A [`ChunkRunner`] decides how the chunks are
//! executed; the fold order never depends on it.

use alloc::vec::Vec;

pub trait ChunkRunner: Sync {
    /// Evaluates `f(0), ..., f(n - 1)` and returns the results in index order.
    fn map_ordered<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs chunks one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl ChunkRunner for Serial {
    fn map_ordered<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
