//! Parallel execution helpers.
//!
//! Heavy loops (table rows, sweep trials, SDP block projections) go through
//! [`map_indexed`], which dispatches to rayon when the `parallel` feature is
//! enabled and falls back to a plain sequential loop otherwise. Results are
//! always returned in input order, so reductions downstream stay
//! deterministic regardless of the execution mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution mode for data-parallel loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[cfg(feature = "parallel")]
    Rayon,
}

impl Default for Parallelism {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        Parallelism::Rayon
    }
    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        Parallelism::Sequential
    }
}

/// Applies `f` to `0..n`, collecting results in index order.
pub fn map_indexed<U, F>(mode: Parallelism, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    match mode {
        Parallelism::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => (0..n).into_par_iter().map(f).collect(),
    }
}

/// In-place parallel update over a mutable slice.
pub fn for_each_mut<T, F>(mode: Parallelism, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    match mode {
        Parallelism::Sequential => {
            for (i, item) in items.iter_mut().enumerate() {
                f(i, item);
            }
        }
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => {
            items.par_iter_mut().enumerate().for_each(|(i, item)| f(i, item));
        }
    }
}
