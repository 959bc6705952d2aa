//! Portable seeded generator used wherever generation needs randomness.
//!
//! SplitMix64, so any implementation can reproduce a level from its seed:
//!
//! ```text
//! state <- state + 0x9E3779B97F4A7C15            (mod 2^64)
//! z     <- state
//! z     <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9 (mod 2^64)
//! z     <- (z xor (z >> 27)) * 0x94D049BB133111EB (mod 2^64)
//! out   <- z xor (z >> 31)
//! ```
//!
//! Uniform draws in `[0, 1)` take the top 53 bits of `out` and scale by 2^-53.

/// SplitMix64 state. Every seed, including zero, is valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Starts a stream from `seed`.
    pub const fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Next 64 raw bits.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n` by multiply-shift. `n` must be non-zero.
    pub fn next_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "next_index needs a non-empty range");
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}
