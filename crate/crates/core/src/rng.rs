//! Seedable, splittable random streams.
//!
//! All Monte Carlo paths in the crate draw from ChaCha8 streams derived
//! from a single recorded seed; worker `i` uses stream `i` of the same
//! seed, so results are independent of scheduling and thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The root generator for a seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Split stream `stream` of the given seed.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
