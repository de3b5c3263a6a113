//! Rayon-backed sample executor.

use rayon::prelude::*;
use wact_core::Executor;

/// Environment variable capping the worker count.
pub const THREADS_VAR: &str = "WACT_THREADS";

pub struct Parallel {
    pool: rayon::ThreadPool,
}

impl Parallel {
    /// At most `threads` workers; `None` means hardware parallelism.
    pub fn new(threads: Option<usize>) -> Parallel {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n.max(1));
        }
        Parallel {
            pool: builder.build().expect("thread pool"),
        }
    }

    /// Honors `WACT_THREADS` when it holds a positive integer.
    pub fn from_env() -> Parallel {
        let cap = std::env::var(THREADS_VAR)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0);
        Parallel::new(cap)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Parallel {
    fn map_indexed<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..count).into_par_iter().map(f).collect())
    }
}
