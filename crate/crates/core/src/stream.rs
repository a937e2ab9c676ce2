//! Seeded, splittable random streams.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

/// Identifies a stream without carrying its state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamDescriptor {
    pub seed: u64,
    pub stream_id: u64,
}

/// A ChaCha8 generator keyed by `(seed, stream_id)`. Equal keys give
/// bit-identical draws; distinct stream ids select disjoint ChaCha streams.
#[derive(Clone, Debug)]
pub struct RandomStream {
    desc: StreamDescriptor,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { desc: StreamDescriptor { seed, stream_id }, rng }
    }

    pub fn from_descriptor(d: StreamDescriptor) -> Self {
        Self::new(d.seed, d.stream_id)
    }

    pub fn descriptor(&self) -> StreamDescriptor {
        self.desc
    }

    pub fn seed(&self) -> u64 {
        self.desc.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.desc.stream_id
    }

    /// Stream for a sub-task, keyed by mixing `index` into this stream's id.
    pub fn substream(&self, index: u64) -> RandomStream {
        let mixed = splitmix(self.desc.stream_id ^ splitmix(index.wrapping_add(0x5851_f42d_4c95_7f2d)));
        RandomStream::new(self.desc.seed, mixed)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `(0, 1]`, safe to take logarithms of.
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Standard complex Gaussian: independent real and imaginary parts of
    /// variance 1/2, so `E|g|^2 = 1`.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(s * self.normal(), s * self.normal())
    }

    /// Gamma(shape, 1).
    pub fn gamma(&mut self, shape: f64) -> f64 {
        Gamma::new(shape, 1.0).expect("positive gamma shape").sample(&mut self.rng)
    }

    pub fn exponential(&mut self) -> f64 {
        -self.uniform_open0().ln()
    }

    /// Poisson(mean) by inversion for small means and the rand_distr
    /// sampler otherwise.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 {
            return 0;
        }
        if mean < 30.0 {
            let mut k = 0u64;
            let mut p = (-mean).exp();
            let mut cdf = p;
            let u = self.uniform();
            while u > cdf && p > 0.0 {
                k += 1;
                p *= mean / k as f64;
                cdf += p;
            }
            k
        } else {
            rand_distr::Poisson::new(mean).expect("finite mean").sample(&mut self.rng) as u64
        }
    }
}

impl RngCore for RandomStream {
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

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_draws() {
        let mut a = RandomStream::new(7, 3);
        let mut b = RandomStream::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn different_streams_differ() {
        let mut a = RandomStream::new(7, 3);
        let mut b = RandomStream::new(7, 4);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn complex_gaussian_unit_variance() {
        let mut s = RandomStream::new(1, 0);
        let m = 100_000;
        let mean = (0..m).map(|_| s.complex_gaussian().norm_sqr()).sum::<f64>() / m as f64;
        assert!((mean - 1.0).abs() < 0.02);
    }

    #[test]
    fn poisson_small_mean() {
        let mut s = RandomStream::new(2, 0);
        let m = 50_000;
        let mean = (0..m).map(|_| s.poisson(1.5) as f64).sum::<f64>() / m as f64;
        assert!((mean - 1.5).abs() < 4.0 * (1.5f64 / m as f64).sqrt());
    }
}
