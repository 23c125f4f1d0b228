//! Seeded probe generator.
//!
//! A 64-bit linear congruential generator with Knuth's MMIX constants
//!
//! ```text
//! state <- state * 6364136223846793005 + 1442695040888963407  (mod 2^64)
//! ```
//!
//! A uniform double in `[0, 1)` is the top 53 bits of the new state times
//! `2^-53`. The seed is the initial state. Every random probe function in the
//! crate draws its coefficients from this generator in a fixed monomial order,
//! so reports are reproducible across implementations.

pub const LCG_MULTIPLIER: u64 = 6_364_136_223_846_793_005;
pub const LCG_INCREMENT: u64 = 1_442_695_040_888_963_407;

#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(LCG_MULTIPLIER)
            .wrapping_add(LCG_INCREMENT);
        self.state
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform in `[-1, 1)`; the coefficient law for probe polynomials.
    pub fn symmetric(&mut self) -> f64 {
        self.uniform(-1.0, 1.0)
    }

    pub fn vector(&mut self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| self.uniform(lo, hi)).collect()
    }

    /// Derives an independent stream, e.g. one per probe index.
    pub fn fork(&mut self) -> Self {
        Self::new(self.next_u64() ^ 0x9E37_79B9_7F4A_7C15)
    }
}
