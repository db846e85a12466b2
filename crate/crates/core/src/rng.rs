//! Deterministic random streams.
//!
//! Every independent unit of work (one shot, one branch/setting block) gets
//! its own ChaCha8 stream: the key comes from the user seed and the stream id
//! is the unit's index. Results therefore do not depend on how work is split.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Packs a (block, item) pair into one stream id.
pub fn block_stream_id(block: u32, item: u32) -> u64 {
    ((block as u64) << 32) | item as u64
}

/// Seed for the `index`-th replicate derived from a base seed (SplitMix64 step).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
