//! Seed derivation for reproducible parallel sampling.
//!
//! Each sampled item owns an independent generator whose seed depends only on
//! the experiment seed and the item index, so results do not depend on thread
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the `index`-th item drawn under experiment seed `base`.
pub fn item_seed(base: u64, index: u64) -> u64 {
    mix(mix(base) ^ index)
}

pub fn item_rng(base: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(item_seed(base, index))
}

/// One draw from the flat Dirichlet distribution on the `len - 1` simplex.
pub fn flat_dirichlet<R: rand::Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = v.iter().sum();
        if total > 0.0 {
            v.iter_mut().for_each(|x| *x /= total);
            return v;
        }
    }
}
