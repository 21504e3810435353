//! Seeded random streams.
//!
//! Every run derives its generators from a single `u64` seed. The generator
//! is ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64`) and independent
//! draws are separated by ChaCha stream id rather than by reseeding:
//!
//! | stream | use                                 |
//! |--------|-------------------------------------|
//! | 0      | latent state path                   |
//! | 1      | signal noise                        |
//!
//! Monte Carlo replicate `k` of a scenario seeded with `s` uses seed
//! `s.wrapping_add(k)`. Normal variates come from `rand_distr::StandardNormal`
//! (ziggurat), so bitwise agreement with other implementations is not
//! expected; only the distribution is.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const PATH_STREAM: u64 = 0;
pub const SIGNAL_STREAM: u64 = 1;

/// Generator for `stream` under `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed of the `k`-th Monte Carlo replicate.
pub fn replicate_seed(seed: u64, k: u64) -> u64 {
    seed.wrapping_add(k)
}
