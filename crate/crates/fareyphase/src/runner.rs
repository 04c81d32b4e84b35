use fareyphase_core::ChunkRunner;
use rayon::prelude::*;

use crate::error::CliError;

pub const THREADS_ENV: &str = "FAREYPHASE_THREADS";

/// A fixed-size rayon pool. Chunk results come back in index order, so the
/// thread count never changes a result.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    pub fn new(threads: usize) -> Result<Self, CliError> {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Pool { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl ChunkRunner for Pool {
    fn map_ordered<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

/// Available parallelism, or 1 if it cannot be queried.
pub fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_keep_index_order() {
        let pool = Pool::new(3).unwrap();
        assert_eq!(pool.threads(), 3);
        let v = pool.map_ordered(100, |i| i * i);
        assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
        assert!(Pool::new(0).is_err());
    }
}
