//! Seeded randomness shared by every stochastic step of the toolkit.
//!
//! All shuffles and samples draw from ChaCha8 seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`. Integers in `[0, n)` are drawn by
//! rejection sampling on raw `u64` words, so a permutation depends only on
//! the ChaCha8 stream and is identical on every platform. Run `r` of an
//! experiment uses seed `base_seed + r`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StdStream = ChaCha8Rng;

pub fn seeded(seed: u64) -> StdStream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed used for run `run` of an experiment started at `base_seed`.
pub fn run_seed(base_seed: u64, run: usize) -> u64 {
    base_seed.wrapping_add(run as u64)
}

/// Uniform integer in `[0, n)`; `n` must be positive.
pub fn uniform_below<R: RngCore>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as u64;
    let zone = u64::MAX - (u64::MAX % n);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % n) as usize;
        }
    }
}

/// Fisher-Yates shuffle driven by [`uniform_below`].
pub fn shuffle<T, R: RngCore>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = uniform_below(rng, i + 1);
        items.swap(i, j);
    }
}

/// `count` distinct positions from `0..n`, in draw order.
pub fn sample_distinct<R: RngCore>(rng: &mut R, n: usize, count: usize) -> Vec<usize> {
    assert!(count <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = i + uniform_below(rng, n - i);
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool
}
