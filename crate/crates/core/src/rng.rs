//! Counter-based random substreams.
//!
//! Every realization draws from its own ChaCha8 stream. The key comes from the
//! master seed and the 64-bit stream id from `(lane, index)`, so a draw depends
//! only on its coordinates and never on scheduling order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Bits reserved for the per-lane index.
const INDEX_BITS: u32 = 40;

pub const MAX_LANE: u64 = (1 << (64 - INDEX_BITS)) - 1;
pub const MAX_INDEX: u64 = (1 << INDEX_BITS) - 1;

/// Lanes below this value are separation indices of a sweep.
pub const SWEEP_LANES: u64 = 1 << 20;
pub const META_LANE: u64 = SWEEP_LANES;
pub const VALIDATION_LANE: u64 = SWEEP_LANES + 16;

pub fn stream_id(lane: u64, index: u64) -> u64 {
    assert!(lane <= MAX_LANE, "lane {lane} exceeds {MAX_LANE}");
    assert!(index <= MAX_INDEX, "index {index} exceeds {MAX_INDEX}");
    (lane << INDEX_BITS) | index
}

pub fn substream(master_seed: u64, lane: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id(lane, index));
    rng
}
