//! Seeded randomness.
//!
//! Every random draw comes from ChaCha8 keyed by the global seed, with the
//! stream number selecting an independent sequence per case (or per test
//! function). Streams never overlap, so results do not depend on the order in
//! which cases run or on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
