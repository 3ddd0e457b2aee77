//! Order-preserving parallel map with a sequential fallback.
//!
//! With the `parallel` feature (the default) enabled, `Auto` fans work out
//! over rayon's thread pool; `Sequential` forces in-order execution in the
//! current thread, which the benchmarks use as a baseline. Without the
//! feature both modes run sequentially.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Auto,
    Sequential,
}

/// Maps `f` over `items`, preserving order in the result.
pub fn map_collect<T, U, F>(par: Parallelism, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    match par {
        #[cfg(feature = "parallel")]
        Parallelism::Auto => {
            use rayon::prelude::*;
            items.into_par_iter().map(f).collect()
        }
        _ => items.into_iter().map(f).collect(),
    }
}
