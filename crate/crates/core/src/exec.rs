use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};

/// Fixed-size worker pool that all parallel phases run on.
///
/// Every phase partitions its work so that results never depend on how tasks
/// are scheduled; the worker count only changes speed.
pub struct Executor {
    workers: usize,
    pool: ThreadPool,
}

impl Executor {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidConfig("worker count must be at least 1".into()));
        }
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("hufpar-worker-{i}"))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
        Ok(Executor { workers, pool })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor").field("workers", &self.workers).finish()
    }
}
