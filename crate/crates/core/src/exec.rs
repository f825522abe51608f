use alloc::vec::Vec;

/// Runs independent work items and returns their results in index order.
///
/// Implementations may evaluate items concurrently but must place the result
/// of item `i` at position `i`; every reduction in this crate then happens
/// sequentially over that vector, so results do not depend on the degree of
/// parallelism.
pub trait Executor: Sync {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Single-threaded executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
