//! Deterministic seed derivation for parallel experiment cells.
//!
//! Every experiment cell (trial index, data/init/test role, grid position)
//! derives its RNG seed by mixing the master seed with a list of role words.
//! Results are therefore independent of scheduling order: a cell's stream
//! depends only on `(master, words)`, never on which thread ran first.

/// SplitMix64 finalizer; decorrelates consecutive or structured inputs.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a sequence of role words.
///
/// The derivation is a SplitMix64-style hash chain: collisions between
/// distinct word sequences are astronomically unlikely, and each child stream
/// is statistically independent of the master stream and of its siblings.
pub fn derive_seed(master: u64, words: &[u64]) -> u64 {
    let mut state = mix(master ^ 0x4e54_4b4c_4142_5345); // constant domain tag
    for &w in words {
        state = mix(state ^ w);
    }
    state
}
