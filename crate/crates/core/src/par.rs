//! Data-parallel map over index ranges.
//!
//! With the `parallel` feature the work is spread over the current rayon
//! pool; without it (or with [`Execution::Sequential`]) it runs in order on
//! the calling thread. Results are always returned in index order, so
//! reductions over them are independent of the thread count.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// True when this build can actually run in parallel.
pub fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}
