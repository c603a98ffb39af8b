//! Data-parallel map over independent work items.
//!
//! Parameter sweeps, seed-grid classifications, and fixed-point searches all
//! reduce to embarrassingly parallel maps over configurations. With the
//! default `parallel` feature the map fans out over a rayon thread pool;
//! without it the same API runs sequentially, which keeps the crate usable
//! in single-threaded or wasm-like environments and gives the benchmarks a
//! baseline.

/// Map `f` over `items`, in parallel when the `parallel` feature is active.
///
/// `f` must be deterministic per item: output order always matches input
/// order, so results are byte-identical across thread counts.
#[cfg(feature = "parallel")]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

/// Map `f` over `items`, in parallel when the `parallel` feature is active.
#[cfg(not(feature = "parallel"))]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

/// Sequential map with the same signature as [`par_map`], kept available in
/// every build so benchmarks can compare the two directly.
pub fn par_map_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}
