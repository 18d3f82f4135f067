//! Optional data parallelism with order-preserving collection.
//!
//! Work is split by row index and results are gathered in index order, so
//! any reduction done by the caller sees the same sequence of partial
//! results whatever the worker count.

use rayon::prelude::*;

use crate::error::{MdeError, Result};

/// Environment variable capping internal worker threads (0 = sequential).
pub const THREADS_ENV: &str = "MDE_THREADS";

pub enum Executor {
    Sequential,
    Pool(rayon::ThreadPool),
}

impl Executor {
    /// `0` gives the sequential executor.
    pub fn new(threads: usize) -> Result<Self> {
        if threads == 0 {
            return Ok(Executor::Sequential);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map(Executor::Pool)
            .map_err(|e| MdeError::InvalidConfig(format!("thread pool: {e}")))
    }

    pub fn map_indexed<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Executor::Sequential => (0..count).map(f).collect(),
            Executor::Pool(pool) => pool.install(|| (0..count).into_par_iter().map(f).collect()),
        }
    }
}

/// Reads the thread cap from `MDE_THREADS`; unset or unparsable means 0.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}
