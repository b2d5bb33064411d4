//! Seedable counter-based random streams.
//!
//! Every sampling operation in this crate takes a `Stream` derived from a
//! master seed plus a purpose tag and a trial index, so independent trials
//! (and independent purposes within one trial) draw from disjoint streams
//! and the whole experiment is reproducible bit-for-bit across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Purpose tags for stream splitting. Values are stable; never reorder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    EdgeSample = 1,
    VertexSample = 2,
    Percolation = 3,
    NibbleRound = 4,
    Shuffle = 5,
    Choice = 6,
    Rainbow = 7,
    Instance = 8,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes an arbitrary list of words into a 64-bit key.
pub fn mix(words: &[u64]) -> u64 {
    let mut state = 0x243f_6a88_85a3_08d3u64;
    let mut acc = 0u64;
    for &w in words {
        state ^= w;
        acc ^= splitmix64(&mut state);
    }
    acc ^ splitmix64(&mut state)
}

/// A deterministic RNG for one (seed, purpose, trial) triple.
pub fn stream(seed: u64, purpose: Purpose, trial: u64) -> ChaCha8Rng {
    let key = mix(&[seed, purpose as u64, trial]);
    let mut state = key;
    let mut seed_bytes = [0u8; 32];
    for chunk in seed_bytes.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed_bytes)
}

/// Stateless uniform draw in [0,1) keyed by the given words.
///
/// Used where a decision must not depend on iteration order (e.g. whether a
/// hyperedge joins a nibble round is keyed by the edge itself, not by its
/// position in the edge list).
pub fn keyed_unit(words: &[u64]) -> f64 {
    let bits = mix(words) >> 11;
    bits as f64 / (1u64 << 53) as f64
}

/// Fisher-Yates shuffle driven by the given stream.
pub fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}
