//! Reproducible random streams.
//!
//! Every stochastic routine draws from a `ChaCha8Rng` seeded with the user
//! seed and selected by stream id, so the draws of node `i`, start `j` do not
//! depend on scheduling or on how many other nodes run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream for `(seed, node, start)`.
pub fn stream(seed: u64, node: u64, start: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((node << 32) ^ start);
    rng
}
