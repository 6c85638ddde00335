//! Seeded, stream-addressable randomness.
//!
//! Every random draw in the crate comes from a [`RngHandle`], a pair of
//! 64-bit seed and stream id. The generator is ChaCha8, so the sequence is
//! a pure function of the pair and independent streams never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type DpRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngHandle {
    pub seed: u64,
    pub stream: u64,
}

impl RngHandle {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Fresh generator positioned at the start of this handle's stream.
    pub fn rng(&self) -> DpRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// A handle on the same stream with a seed mixed from `tag`.
    ///
    /// Used to give separate purposes (data generation, each estimator)
    /// their own sequences while keeping the stream id equal to the trial.
    pub fn derive(&self, tag: u64) -> Self {
        Self {
            seed: mix64(self.seed ^ mix64(tag.wrapping_add(0x9E37_79B9_7F4A_7C15))),
            stream: self.stream,
        }
    }

    pub fn with_stream(&self, stream: u64) -> Self {
        Self {
            seed: self.seed,
            stream,
        }
    }
}

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
