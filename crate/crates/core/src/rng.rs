//! Deterministic seeded parallelism: every Monte Carlo trial draws from its
//! own RNG stream derived from `(seed, index)` with SplitMix64, so results are
//! a pure function of the configuration and identical for any thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// SplitMix64 finalizer; mixes a base seed with a trial counter.
pub fn stream_seed(base_seed: u64, index: u64) -> u64 {
    let mut z = base_seed
        .wrapping_add(0x9e3779b97f4a7c15)
        .wrapping_add(index.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// RNG for one `(seed, index)` stream.
pub fn stream_rng(base_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(base_seed, index))
}

/// Fisher-Yates permutation of 0..n from the given stream.
pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    use rand::Rng;
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Runs `trials` independent tasks on a scoped thread pool and returns their
/// results in trial order. `threads == 0` uses the rayon default. Because each
/// task sees only its own index and results are collected in index order,
/// output is byte-identical for every thread count.
pub fn run_trials<T, F>(trials: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    if threads == 1 {
        return (0..trials as u64).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("failed to build thread pool");
    pool.install(|| (0..trials as u64).into_par_iter().map(f).collect())
}
