//! Deterministic seed derivation and counter-based substreams.
//!
//! Every random draw in the crate comes from a ChaCha8 keystream addressed by
//! `(key, stream, slot)`. Dummy `l` reads stream `l`; slot `k` holds the
//! draws for its `k`-th fresh projection and two reserved slots hold its
//! realization. Results therefore do not depend on evaluation order or on the
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Words reserved per slot inside one stream.
const SLOT_SHIFT: u32 = 36;

/// Slot used for the first realization attempt of a dummy.
pub const REALIZE_SLOT: u64 = 1 << 31;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for task `index` of a run seeded with `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master) ^ mix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// 256-bit ChaCha key expanded from a 64-bit seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey([u8; 32]);

impl StreamKey {
    pub fn from_seed(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_exact_mut(8) {
            state = mix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        Self(key)
    }

    /// Generator positioned at the start of `(stream, slot)`.
    pub fn substream(&self, stream: u64, slot: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.0);
        rng.set_stream(stream);
        rng.set_word_pos((slot as u128) << SLOT_SHIFT);
        rng
    }
}

/// A seeded generator for tasks that do not need substream addressing.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    StreamKey::from_seed(seed).substream(0, 0)
}
