//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the user seed
//! (`ChaCha8Rng::seed_from_u64(seed)`) with its 64-bit stream id set to a
//! SplitMix64 fold of a path of labels, e.g. `[REPETITION, rep, SCHEME, b]`.
//! Streams with different paths are independent and the result never
//! depends on which worker consumes which stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Top-level stream labels, kept distinct so nested paths never collide.
pub mod label {
    pub const SERIES: u64 = 1;
    pub const ORACLE: u64 = 2;
    pub const REPETITION: u64 = 3;
    pub const MULTIPLIER: u64 = 4;
    pub const STATIONARY_DMC: u64 = 5;
    pub const STATIONARY_MODIFIED: u64 = 6;
    pub const BOOTSTRAP: u64 = 7;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream id for a label path.
pub fn stream_id(path: &[u64]) -> u64 {
    path.iter().fold(0x6A09_E667_F3BC_C908, |acc, &x| {
        splitmix64(acc ^ splitmix64(x))
    })
}

pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(path));
    rng
}
