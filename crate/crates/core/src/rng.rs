//! Seeded randomness. Every random choice in the crate flows through here.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default seed when none is supplied.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Perturbation attempts before a degenerate configuration is reported.
pub const MAX_ATTEMPTS: usize = 32;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 step; used to derive independent per-attempt and per-item seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
