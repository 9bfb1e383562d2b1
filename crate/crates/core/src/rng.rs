//! Deterministic seeding. Every random stream in the crate is a ChaCha8
//! generator keyed by a base seed and a path of integer tags, so the values a
//! task draws do not depend on scheduling.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

pub type SeededRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `tags` into `seed`.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix64(seed), |acc, &t| {
        splitmix64(acc.wrapping_mul(0xD1B5_4A32_D192_ED03).wrapping_add(splitmix64(t)))
    })
}

pub fn rng_for(seed: u64, tags: &[u64]) -> SeededRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tags))
}

pub fn standard_normals<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Laplace draws scaled to unit variance.
pub fn unit_laplace<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let b = core::f64::consts::FRAC_1_SQRT_2;
    (0..n)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            if rng.random::<bool>() {
                b * e
            } else {
                -b * e
            }
        })
        .collect()
}

pub fn uniform<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}
