//! Seeded uniform source shared by the simulator and the random baselines.
//!
//! xoshiro256** seeded from a `u64` through SplitMix64; uniforms take the top
//! 53 bits of each output.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

const SCALE: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct StegoRng(Xoshiro256StarStar);

impl StegoRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform_open_low(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * SCALE
    }
}
