//! Deterministic random sub-streams.
//!
//! Every rollout owns its generator, keyed by `(seed, iteration, index)`, so
//! offspring can be decoded in parallel without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SearchRng = ChaCha8Rng;

/// Stream index reserved for parent selection within an iteration.
pub const SELECT_STREAM: u64 = u64::MAX;
/// Stream index reserved for replacement within an iteration.
pub const REPLACE_STREAM: u64 = u64::MAX - 1;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed with a key into a new, well-separated seed.
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(key.wrapping_add(0x6A09_E667_F3BC_C909)))
}

pub fn substream(seed: u64, iteration: u64, index: u64) -> SearchRng {
    SearchRng::seed_from_u64(derive_seed(derive_seed(seed, iteration), index))
}
