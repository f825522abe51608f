//! Rayon-backed [`Executor`].

use anderson_core::Executor;
use rayon::prelude::*;

use crate::CliError;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ANDERSON_THREADS";

pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    pub fn with_threads(threads: usize) -> Result<Self, CliError> {
        if threads == 0 {
            return Err(CliError::bad_input("thread count must be positive"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::bad_input(format!("thread pool: {e}")))?;
        Ok(Self { pool })
    }

    /// Honours `ANDERSON_THREADS`; otherwise one thread per available core.
    pub fn from_env() -> Result<Self, CliError> {
        let threads = match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::bad_input(format!("{THREADS_ENV}={v:?} is not a positive integer")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        Self::with_threads(threads)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        // indexed collect keeps item i at position i
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
