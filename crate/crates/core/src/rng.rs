//! Seeded random streams.
//!
//! Every run owns one [`RngStream`]. Replicates derived from one master seed
//! use distinct ChaCha stream ids, so they never overlap and a run is fully
//! determined by `(seed, stream)`.

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    /// Stream for replicate `index` of an experiment seeded with `master`.
    pub fn replicate(master: u64, index: u64) -> Self {
        Self::new(master, index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform on `[-1, 1)`.
    pub fn symmetric(&mut self) -> f64 {
        2.0 * self.uniform() - 1.0
    }

    /// Exponential holding time with the given total rate.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        // 1 - U lies in (0, 1], so the logarithm is finite.
        -(1.0 - self.uniform()).ln() / rate
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Uniform point in the disk of radius `radius`, by rejection from the
    /// bounding square.
    pub fn disk(&mut self, radius: f64) -> (f64, f64) {
        loop {
            let x = self.symmetric();
            let y = self.symmetric();
            if x * x + y * y < 1.0 {
                return (radius * x, radius * y);
            }
        }
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

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> core::result::Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn equal_seeds_give_equal_draws() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        let xa: Vec<f64> = (0..100).map(|_| a.uniform()).collect();
        let xb: Vec<f64> = (0..100).map(|_| b.uniform()).collect();
        assert_eq!(xa, xb);
    }

    #[test]
    fn streams_differ() {
        let mut a = RngStream::replicate(7, 0);
        let mut b = RngStream::replicate(7, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn disk_points_stay_inside() {
        let mut r = RngStream::new(1, 0);
        let mut mean = (0.0, 0.0);
        let n = 20_000;
        for _ in 0..n {
            let (x, y) = r.disk(0.5);
            assert!(x * x + y * y < 0.25);
            mean.0 += x / n as f64;
            mean.1 += y / n as f64;
        }
        assert!(mean.0.abs() < 0.01 && mean.1.abs() < 0.01);
    }

    #[test]
    fn exponential_mean() {
        let mut r = RngStream::new(11, 0);
        let n = 50_000;
        let m: f64 = (0..n).map(|_| r.exponential(4.0)).sum::<f64>() / n as f64;
        assert!((m - 0.25).abs() < 0.005, "{m}");
    }
}
