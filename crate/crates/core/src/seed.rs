//! Seed derivation.
//!
//! Every randomized component draws from a ChaCha8 stream whose seed is a
//! pure function of a master seed and a path of integers, e.g.
//! `(master, iteration, fold, COMPONENT)`. Mixing uses the SplitMix64
//! finalizer applied to the running state after each path element, so
//! `derive(s, &[a, b])` differs from `derive(s, &[b, a])`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and a path of integers.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix(master), |acc, &p| splitmix(acc ^ splitmix(p)))
}

/// Hashes a string into a path element (FNV-1a).
pub fn tag(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rng_from(master: u64, path: &[u64]) -> Rng {
    rng(derive(master, path))
}
