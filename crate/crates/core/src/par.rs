//! Data-parallel helpers with a sequential fallback.
//!
//! Results are always collected in index order, and any floating-point
//! reduction over them is done sequentially by the caller, so parallel and
//! sequential execution produce bit-identical output.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential execution when the `parallel` feature is off.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
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

/// Maps `f` over a slice, preserving order.
pub fn map_slice<S, T, F>(exec: Execution, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Chunk size for [`chunked_reduce`]; fixed so the summation order does not
/// depend on the thread count.
pub const REDUCE_CHUNK: usize = 64;

/// Folds `0..n` in fixed-size chunks, then combines the chunk partials in
/// order. The association order is the same for both execution modes.
pub fn chunked_reduce<T, F, G>(exec: Execution, n: usize, fold_chunk: F, combine: G) -> Option<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
    G: Fn(T, T) -> T,
{
    let chunks = n.div_ceil(REDUCE_CHUNK);
    let partials = map_indexed(exec, chunks, |c| {
        let lo = c * REDUCE_CHUNK;
        fold_chunk(lo..(lo + REDUCE_CHUNK).min(n))
    });
    partials.into_iter().reduce(combine)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let a = map_indexed(Execution::Sequential, 1000, f);
        let b = map_indexed(Execution::Parallel, 1000, f);
        assert_eq!(a, b);
        let sa: f64 = a.iter().sum();
        let sb: f64 = b.iter().sum();
        assert_eq!(sa.to_bits(), sb.to_bits());
    }
}
