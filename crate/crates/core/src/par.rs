//! Order-preserving data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over rayon's pool;
//! without it every call runs sequentially. Results always come back in
//! index order, so reductions over them are deterministic either way.

/// Execution mode requested by a caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, mode: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Whether [`Parallelism::Parallel`] actually uses worker threads in this build.
pub const fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Caps the number of worker threads used by [`Parallelism::Parallel`].
///
/// Must run before the first parallel call; later calls fail because the
/// global pool already exists. Without the `parallel` feature this is a no-op.
pub fn set_max_threads(n: usize) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_indexed(100, Parallelism::Sequential, |i| i * i);
        let par = map_indexed(100, Parallelism::Parallel, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }
}
