//! Deterministic random-number streams.
//!
//! Every randomized routine in the crate takes a `u64` seed and derives its
//! generator here. ChaCha gives identical sequences on every platform, and its
//! independent stream counter lets one seed drive many unrelated consumers
//! (per-object sampling, per-restart optimization, ...) without their draw
//! counts interfering.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for `seed`, stream 0.
pub fn rng_for_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for an independent stream under the same seed.
pub fn rng_for_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
