//! Seed derivation.
//!
//! A run seed is split into named substreams so that adding a policy or a
//! draw site never perturbs the others. Streams are ChaCha8 keyed by the run
//! seed with the stream id taken from the substream name. Per-event draws
//! (cooldowns, outcome noise) use a counter keyed by `(seed, round,
//! individual, resource)` so every policy sees the same draw for the same
//! event.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// FNV-1a over the bytes of `name`.
pub fn stream_id(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Named substream of a run seed.
pub fn substream(seed: u64, name: &str) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(name));
    rng
}

/// Substream indexed by a sequence of integers beneath a named stream,
/// e.g. `(meta, cohort, iteration, candidate)`.
pub fn indexed_stream(seed: u64, name: &str, index: &[u64]) -> SimRng {
    let mut key = mix64(seed ^ stream_id(name));
    for &i in index {
        key = mix64(key ^ i.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    }
    ChaCha8Rng::seed_from_u64(key)
}
