//! Reproducible random streams.
//!
//! Every stream is addressed by a root seed and a path of integer labels
//! (purpose tag, index `m`, replica id, ...). The path is folded into a
//! 64-bit ChaCha stream id, so two streams with different paths never share
//! keystream and a given path always yields the same draws no matter which
//! thread asks for it.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stream purpose tags. Kept in one place so that no two subsystems collide.
pub mod tag {
    pub const NOISE: u64 = 1;
    pub const COUPLED: u64 = 2;
    pub const CYCLE: u64 = 3;
    pub const LONG_RUN: u64 = 4;
    pub const TAU: u64 = 5;
    pub const PROJECTION: u64 = 6;
    pub const GAMMA_SEARCH: u64 = 7;
    pub const RANDOM_WALK: u64 = 8;
    pub const NON_HITTING: u64 = 9;
    pub const PLAIN_CHAIN: u64 = 10;
    pub const VERIFY: u64 = 11;
}

const TWO_POW_MINUS_53: f64 = 1.0 / 9_007_199_254_740_992.0;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a label path into a stream id.
fn stream_id(path: &[u64]) -> u64 {
    path.iter().fold(0x51_7cc1_b727_220a_u64, |acc, &label| {
        splitmix64(acc ^ splitmix64(label))
    })
}

/// A counter-based random stream keyed by `(seed, path)`.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    path: Vec<u64>,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, path: &[u64]) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id(path));
        Self {
            seed,
            path: path.to_vec(),
            rng,
        }
    }

    /// A fresh stream whose path extends this one's by `labels`.
    /// The child does not depend on how many draws the parent has made.
    pub fn split(&self, labels: &[u64]) -> Self {
        let mut path = self.path.clone();
        path.extend_from_slice(labels);
        Self::new(self.seed, &path)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * TWO_POW_MINUS_53
    }

    /// Uniform on `[lo, hi)`.
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// `+1` or `-1` with equal probability.
    #[inline]
    pub fn sign(&mut self) -> f64 {
        if self.rng.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_draws() {
        let mut a = RandomStream::new(42, &[tag::CYCLE, 100, 7]);
        let mut b = RandomStream::new(42, &[tag::CYCLE, 100, 7]);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn different_paths_differ() {
        let mut a = RandomStream::new(42, &[tag::CYCLE, 100, 7]);
        let mut b = RandomStream::new(42, &[tag::CYCLE, 100, 8]);
        let mut c = RandomStream::new(43, &[tag::CYCLE, 100, 7]);
        let xa: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..4).map(|_| c.next_u64()).collect();
        assert_ne!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn split_ignores_parent_position() {
        let mut parent = RandomStream::new(1, &[tag::TAU]);
        let before = parent.split(&[3]);
        for _ in 0..17 {
            parent.next_u64();
        }
        let after = parent.split(&[3]);
        let mut x = before.clone();
        let mut y = after.clone();
        assert_eq!(x.next_u64(), y.next_u64());
        assert_eq!(after.path(), &[tag::TAU, 3]);
    }

    #[test]
    fn uniform_moments() {
        let mut s = RandomStream::new(9, &[0]);
        let n = 200_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
            sum += u;
            sum2 += u * u;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!((mean - 0.5).abs() < 5.0 * (1.0 / 12.0 / n as f64).sqrt());
        assert!((var - 1.0 / 12.0).abs() < 1e-3);
    }
}
