//! Seeded, portable random streams.
//!
//! Every random draw in the crate comes from ChaCha8 keyed by a 64-bit seed.
//! Work that must be reproducible item by item (the i-th hyperplane, the
//! i-th sample chunk) uses its own ChaCha stream number `i`, so its values do
//! not depend on how many other items are drawn or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sequential generator for `seed`.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mixes a domain tag into a seed (splitmix64 finalizer) so that different
/// consumers of one user seed draw unrelated values.
pub fn derive(seed: u64, domain: u64) -> u64 {
    let mut z = seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
