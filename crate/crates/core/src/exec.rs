//! Trial-level parallelism helpers.
//!
//! Monte-Carlo trials, dataset realizations, and ELM hidden-layer rows are
//! independent, so they map over an index range. With the `parallel` feature
//! (default) the mapping runs on a rayon pool whose size is capped by the
//! `HBF_THREADS` environment variable; without it everything is sequential.
//! Results are collected in index order either way, so output bytes never
//! depend on the worker count.

/// Environment variable capping the worker count of the internal pool.
pub const THREADS_ENV: &str = "HBF_THREADS";

#[cfg(feature = "parallel")]
mod pool {
    use std::sync::OnceLock;

    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();

    pub(super) fn get() -> &'static rayon::ThreadPool {
        POOL.get_or_init(|| {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = std::env::var(super::THREADS_ENV)
                .ok()
                .and_then(|v| v.parse::<usize>().ok())
                .filter(|&n| n >= 1)
            {
                builder = builder.num_threads(n);
            }
            builder.build().expect("failed to build worker pool")
        })
    }
}

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is enabled.
///
/// The result vector is always in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    pool::get().install(|| (0..n).into_par_iter().map(f).collect())
}

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is enabled.
///
/// The result vector is always in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// Sequential counterpart of [`map_indexed`], available regardless of
/// features. The benches compare the two on identical workloads.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Derives an independent stream seed from a base seed and a stream index.
///
/// SplitMix64 over `base + index * golden`, so per-trial seeds are stable
/// no matter how trials are scheduled.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
