//! Seeded randomness.
//!
//! Every sampling path in the crate flows through [`ChaCha8Rng`], a named,
//! cross-platform deterministic generator, so that identical seeds reproduce
//! identical results on any machine. Independent streams are derived by
//! mixing the base seed with context tags via SplitMix64 steps.

use crate::scalar::{lit, Scalar};
use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded generator for `seed` mixed with the given context tags.
pub fn seeded(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut s = splitmix64(seed);
    for &t in tags {
        s = splitmix64(s ^ t);
    }
    ChaCha8Rng::seed_from_u64(s)
}

/// One standard-normal draw (Box-Muller), computed in f64 then narrowed.
pub fn standard_normal<F: Scalar>(rng: &mut ChaCha8Rng) -> F {
    // gen::<f64>() is in [0, 1); shift to (0, 1] so ln is finite
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
    lit(z)
}

/// Fisher-Yates shuffle of `0..n`, returning the permuted indices.
pub fn shuffled_indices(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

/// Sample `k` distinct indices from `0..n` without replacement, in draw order.
pub fn sample_without_replacement(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    assert!(k <= n, "cannot sample {k} from {n}");
    let mut idx = shuffled_indices(n, rng);
    idx.truncate(k);
    idx
}
