//! Counter-based random number generator with fixed, documented constants.
//!
//! Every stochastic computation in this crate draws from `SplitMix64`
//! streams keyed by `(seed, stream)`. The generator is a pure function of
//! its counter, so any implementation (in any language) that follows the
//! constants below reproduces the exact same `u64` sequence:
//!
//! ```text
//! GAMMA = 0x9E3779B97F4A7C15
//! mix(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!         z ^= z >> 27; z *= 0x94D049BB133111EB;
//!         z ^= z >> 31; return z
//! key(seed, stream) = mix(seed ^ mix(stream * GAMMA))
//! output(i)         = mix(key + (i + 1) * GAMMA),   i = 0, 1, 2, ...
//! ```
//!
//! All arithmetic is wrapping 64-bit. Derived values:
//!
//! - uniform in `[0, 1)`: `(output >> 11) * 2^-53`
//! - uniform in `(0, 1]`: `((output >> 11) + 1) * 2^-53` (used wherever a
//!   logarithm or an inverse CDF must not see zero)
//! - standard normal pair by Box-Muller from one `(0,1]` and one `[0,1)`
//!   draw, in that order: `r = sqrt(-2 ln u1)`, `(r cos(2 pi u2), r sin(2 pi u2))`

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    key: u64,
    counter: u64,
}

impl SplitMix64 {
    /// Stream `stream` of the family rooted at `seed`. Distinct streams are
    /// statistically independent; chunked integration assigns one stream per
    /// chunk so results do not depend on scheduling.
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            key: mix(seed ^ mix(stream.wrapping_mul(GAMMA))),
            counter: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform on `[0, 1)` with 53-bit resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`; safe under `ln` and inverse CDFs.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One Box-Muller pair of independent standard normals.
    #[inline]
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = std::f64::consts::TAU * u2;
        (r * t.cos(), r * t.sin())
    }
}

/// Derives a fresh seed for an auxiliary run (e.g. independent evaluations
/// of neighbouring grid points) without colliding with chunk streams.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix(seed.wrapping_add(mix(tag ^ 0xA076_1D64_78BD_642F)))
}
