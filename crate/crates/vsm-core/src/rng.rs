//! Seeded, stream-indexed random number generation.
//!
//! Every sampler in the crate takes an [`RngStream`]; identical
//! `(seed, stream_index)` pairs reproduce identical variate sequences on
//! every platform. Monte Carlo drivers assign one stream per path so that
//! results do not depend on worker count or scheduling order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_index);
        RngStream { seed, stream_index, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// `(seed, stream_index)`, recorded into every [`crate::path::Path`].
    pub fn record(&self) -> (u64, u64) {
        (self.seed, self.stream_index)
    }

    /// A fresh stream with the same seed and a different index.
    pub fn substream(&self, stream_index: u64) -> Self {
        RngStream::new(self.seed, stream_index)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}
