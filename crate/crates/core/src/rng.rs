//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator. A `seed`
//! selects the key; `stream(seed, s)` selects one of 2^64 independent
//! streams under that key, so parallel trials can each own a stream
//! without coordination. Stream 0 is the stream returned by `seeded`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = seeded(seed);
    rng.set_stream(stream);
    rng
}
