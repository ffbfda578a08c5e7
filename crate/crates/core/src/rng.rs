//! Counter-based random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 generator
//! keyed by `(seed, stream)`; within a stream the generator's word position
//! is the counter. Work is split into fixed chunks, each with its own
//! stream id, so the sample set never depends on how chunks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream-id namespaces. Distinct consumers never share a stream.
pub mod tag {
    pub const SAMPLER: u64 = 0x5354_4142;
    pub const ESTIMATE: u64 = 0x4553_5449;
    pub const SUP_NORM: u64 = 0x5355_504e;
    pub const WEAK_NORM: u64 = 0x5745_414b;
    pub const SEARCH: u64 = 0x5345_4152;
    pub const OPERATOR: u64 = 0x4f50_4552;
    pub const BOOTSTRAP: u64 = 0x424f_4f54;
    pub const DOMINATION: u64 = 0x444f_4d49;
    pub const EXPERIMENT: u64 = 0x4558_5045;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child stream id for `index` under `parent`.
#[inline]
pub fn substream(parent: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// Generator for `(seed, stream)`, positioned at counter zero.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for `(seed, stream)` advanced to `word` 32-bit words.
pub fn stream_rng_at(seed: u64, stream: u64, word: u128) -> StreamRng {
    let mut rng = stream_rng(seed, stream);
    rng.set_word_pos(word);
    rng
}
