//! Seeded noise source used by the synthetic generators and GP draws.
//!
//! The stream is fixed so that fixtures can be regenerated by any
//! implementation:
//!
//! 1. `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha 0.9, which expands the
//!    `u64` seed with PCG32 as specified by `rand_core`).
//! 2. Uniforms are `((next_u64() >> 11) + 0.5) · 2⁻⁵³`, strictly inside (0, 1).
//! 3. Standard normals use the cosine branch of Box–Muller,
//!    `√(−2 ln u₁) · cos(2π u₂)`, consuming two uniforms per normal.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (((self.rng.next_u64() >> 11) as f64) + 0.5) * SCALE
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
