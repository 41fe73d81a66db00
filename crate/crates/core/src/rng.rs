//! Counter-based Gaussian variates.
//!
//! Every draw is addressed by `(seed, stream, index)`: the ChaCha8 key comes
//! from the seed, the 64-bit stream id selects an independent keystream and
//! variate `index` consumes the four 32-bit words starting at `4 * index`.
//! Any cell can therefore be regenerated without replaying the ones before it.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream ids at or above this value are reserved for non-noise purposes
/// (noise streams are indexed by time step).
pub const AUXILIARY_STREAM_BASE: u64 = 1 << 48;

#[inline]
fn box_muller(a: u64, b: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    // u1 ∈ (0, 1] keeps the logarithm finite
    let u1 = ((a >> 11) + 1) as f64 * SCALE;
    let u2 = (b >> 11) as f64 * SCALE;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Sequential standard normals from one `(seed, stream)` keystream.
#[derive(Clone)]
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        NormalStream { rng }
    }

    /// Start at variate `index` of the stream.
    pub fn at(seed: u64, stream: u64, index: u64) -> Self {
        let mut s = Self::new(seed, stream);
        s.rng.set_word_pos(4 * index as u128);
        s
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        box_muller(a, b)
    }

    /// A uniform variate on `[0, 1)`; consumes one variate slot.
    pub fn next_uniform(&mut self) -> f64 {
        let a = self.rng.next_u64();
        let _ = self.rng.next_u64();
        (a >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.next_normal();
        }
    }
}

/// The standard normal at `(seed, stream, index)`.
pub fn normal_at(seed: u64, stream: u64, index: u64) -> f64 {
    NormalStream::at(seed, stream, index).next_normal()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_access_matches_sequential() {
        let mut s = NormalStream::new(42, 7);
        let seq: Vec<f64> = (0..100).map(|_| s.next_normal()).collect();
        for i in [0usize, 1, 17, 63, 99] {
            assert_eq!(seq[i], normal_at(42, 7, i as u64));
        }
    }

    #[test]
    fn streams_and_seeds_differ() {
        assert_ne!(normal_at(1, 0, 0), normal_at(2, 0, 0));
        assert_ne!(normal_at(1, 0, 0), normal_at(1, 1, 0));
    }

    #[test]
    fn moments() {
        let mut s = NormalStream::new(3, AUXILIARY_STREAM_BASE);
        let n = 200_000;
        let (mut m1, mut m2, mut m4) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let z = s.next_normal();
            m1 += z;
            m2 += z * z;
            m4 += z * z * z * z;
        }
        let nf = n as f64;
        assert!((m1 / nf).abs() < 5.0 / nf.sqrt());
        assert!((m2 / nf - 1.0).abs() < 5.0 * (2.0 / nf).sqrt());
        assert!((m4 / nf - 3.0).abs() < 5.0 * (96.0 / nf).sqrt());
    }
}
