use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};

/// Fixed-size pool for the fork-join parts of a run. Work is always
/// collected in index order, so results do not depend on the size.
pub struct WorkerPool {
    pool: ThreadPool,
}

impl WorkerPool {
    /// `workers = 0` picks one worker per available core.
    pub fn new(workers: usize) -> Result<Self> {
        let pool = ThreadPoolBuilder::new()
            .num_threads(Self::resolve(workers))
            .build()
            .map_err(|e| Error::arg(format!("cannot start worker pool: {e}")))?;
        Ok(WorkerPool { pool })
    }

    pub fn resolve(workers: usize) -> usize {
        if workers > 0 {
            workers
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rayon::prelude::*;

    #[test]
    fn ordered_merge() {
        let a: Vec<u64> = WorkerPool::new(1).unwrap().install(|| (0..1000u64).into_par_iter().map(|x| x * x).collect());
        let b: Vec<u64> = WorkerPool::new(4).unwrap().install(|| (0..1000u64).into_par_iter().map(|x| x * x).collect());
        assert_eq!(a, b);
        assert_eq!(WorkerPool::new(3).unwrap().threads(), 3);
    }
}
