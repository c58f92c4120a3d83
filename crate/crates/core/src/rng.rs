//! Counter-based random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the master seed; the 64-bit
//! stream id packs `(sample size, replication)`. Streams are therefore
//! independent of scheduling and of how many threads consume them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for a plain seed (stream 0).
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for replication `replication` at sample size `n`.
///
/// Both coordinates must fit in 32 bits; larger values are folded with a
/// mixing function, which keeps determinism but loses the collision-free
/// guarantee.
pub fn replication_stream(master: u64, n: usize, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream_id(n as u64, replication as u64));
    rng
}

fn stream_id(n: u64, replication: u64) -> u64 {
    if n <= u32::MAX as u64 && replication <= u32::MAX as u64 {
        (n << 32) | replication
    } else {
        splitmix64(splitmix64(n) ^ replication)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
