//! Seeded random streams.
//!
//! Every run derives its generators from a single `u64` seed. Independent
//! consumers (environment generation, episode sampling, randomized agents) use
//! distinct ChaCha stream ids so they never share draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub const ENV_STREAM: u64 = 0;
pub const EPISODE_STREAM: u64 = 1;
pub const AGENT_STREAM: u64 = 2;

pub fn stream(seed: u64, id: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
