//! Reproducible random streams.
//!
//! An [`RngStream`] is ChaCha8 keyed by a 64-bit seed and positioned on one
//! of its 2^64 independent streams. Workers that run in parallel each get
//! their own stream through [`RngStream::child`], so results do not depend on
//! scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer, used to spread child ids over the stream space.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A fresh stream with the same seed, derived from this stream's id and
    /// `id`. Distinct ids give distinct streams; the parent is not advanced.
    pub fn child(&self, id: u64) -> Self {
        let derived = splitmix64(self.stream ^ splitmix64(id.wrapping_add(1)));
        Self::new(self.seed, derived)
    }

    /// Uniform on the open interval `(0, 1)`: the 53-bit grid shifted by half
    /// a step, so neither end is ever returned.
    pub fn uniform_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
