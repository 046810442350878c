//! Data-parallel helpers. With the `parallel` feature the rayon pool is used;
//! without it every call runs sequentially. Results are always returned in
//! input order, and chunk boundaries never depend on the thread count, so
//! reductions performed by callers are bit-identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    #[default]
    Rayon,
}

impl Parallelism {
    /// `Rayon` when compiled with the `parallel` feature, else `Sequential`.
    pub fn available() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Rayon
        } else {
            Parallelism::Sequential
        }
    }
}

/// Apply `f` to every item, returning results in input order.
pub fn map<T, R, F>(items: &[T], par: Parallelism, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    match par {
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect(),
        _ => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
    }
}

/// Apply `f` to fixed-size chunks (the last may be shorter), returning one
/// result per chunk in order. `f` receives the chunk's starting index.
pub fn map_chunks<T, R, F>(items: &[T], chunk: usize, par: Parallelism, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &[T]) -> R + Sync + Send,
{
    let chunk = chunk.max(1);
    match par {
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => items
            .par_chunks(chunk)
            .enumerate()
            .map(|(i, c)| f(i * chunk, c))
            .collect(),
        _ => items
            .chunks(chunk)
            .enumerate()
            .map(|(i, c)| f(i * chunk, c))
            .collect(),
    }
}
