//! Seed derivation and stream RNG construction.
//!
//! All randomness flows through [`ChaCha8Rng`] seeded via a SplitMix64-style
//! hash of `(master_seed, stream, substream)`. ChaCha8 is a counter-based
//! generator with platform-independent output, so every sequence in this
//! crate is bit-reproducible given the same seed triple. Parallel workers
//! derive disjoint streams by index instead of sharing one generator.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer step.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and two stream indices.
///
/// Each word is folded through the SplitMix64 finalizer, so nearby indices
/// yield statistically independent child seeds.
pub fn derive_seed(master: u64, stream: u64, substream: u64) -> u64 {
    let mut z = splitmix64(master);
    z = splitmix64(z ^ splitmix64(stream));
    z = splitmix64(z ^ splitmix64(substream.wrapping_add(0x5851_f42d_4c95_7f2d)));
    z
}

/// Constructs the stream RNG for a derived seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Convenience: RNG for `(master, stream, substream)`.
pub fn derive_rng(master: u64, stream: u64, substream: u64) -> ChaCha8Rng {
    rng_from_seed(derive_seed(master, stream, substream))
}
