//! Deterministic batch evaluation. With the `parallel` feature (on by
//! default) batches fan out over a rayon pool; without it they run
//! sequentially. Output order always matches input order, so results are
//! identical either way.

/// Map `f` over `items`, preserving input order in the output.
#[cfg(feature = "parallel")]
pub fn batch_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

/// Map `f` over `items`, preserving input order in the output.
#[cfg(not(feature = "parallel"))]
pub fn batch_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    batch_map_sequential(items, f)
}

/// Single-threaded reference path for [`batch_map`].
pub fn batch_map_sequential<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}
