//! Seeded, splittable random streams.
//!
//! Reproducibility contract: every random quantity in this crate is a pure
//! function of a 64-bit seed. The generator is ChaCha12 keyed by
//! `SeedableRng::seed_from_u64(seed)` with the ChaCha stream nonce set to the
//! draw index, so draw `i` of a batch is independent of how draws are
//! partitioned across threads. Standard normals come from the Box-Muller
//! transform applied to 53-bit uniforms; no external distribution tables are
//! involved, so output is bit-stable across dependency upgrades.
//!
//! Components that need several independent batches from one logical seed
//! derive sub-seeds with [`sub_seed`] (SplitMix64 over seed and a tag), which
//! keeps their streams disjoint.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

const TWO_POW_NEG53: f64 = 1.0 / (1u64 << 53) as f64;
const TAU: f64 = 2.0 * std::f64::consts::PI;

/// One independent random stream, addressed by `(seed, stream)`.
pub struct DrawRng {
    inner: ChaCha12Rng,
    cached_normal: Option<f64>,
}

impl DrawRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        DrawRng {
            inner,
            cached_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on (0, 1]; never returns 0 so `ln` stays finite.
    fn uniform_open_closed(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * TWO_POW_NEG53
    }

    /// Uniform on [0, 1).
    fn uniform_half_open(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_NEG53
    }

    /// Standard normal via Box-Muller; the second value of each pair is cached.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        let radius = (-2.0 * self.uniform_open_closed().ln()).sqrt();
        let angle = TAU * self.uniform_half_open();
        self.cached_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// Derive a disjoint sub-seed for an independent component (SplitMix64).
pub fn sub_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
