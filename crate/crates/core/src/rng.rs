//! Portable seeded generator for supply draws.
//!
//! The stream is SplitMix64 (Steele, Lea & Flood), and bounded integers are
//! drawn by rejection so every value in `[low, high]` is exactly equally
//! likely. Both steps are fully specified in `docs/schema.md`, so any
//! implementation can reproduce a game's supply sequence from its seed.

use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in the inclusive range `[low, high]`.
    ///
    /// Panics if `low > high`.
    pub fn uniform_inclusive(&mut self, low: u64, high: u64) -> u64 {
        assert!(low <= high, "empty range {low}..={high}");
        let span = high - low;
        if span == u64::MAX {
            return self.next_u64();
        }
        let range = span + 1;
        // Draws below `threshold` would bias the low residues.
        let threshold = range.wrapping_neg() % range;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return low + x % range;
            }
        }
    }

    /// Uniform float in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Mixes several words into one seed. Used to derive independent streams
/// (e.g. per player, per day) from a base seed.
pub fn mix_seed(words: &[u64]) -> u64 {
    let mut acc = SplitMix64::new(0x005E_ED0F_F1CE);
    let mut out = acc.next_u64();
    for &w in words {
        acc = SplitMix64::new(out ^ w);
        out = acc.next_u64();
    }
    out
}
