//! The pinned pseudo-random stream.
//!
//! Generator: xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). Conversions on top of the raw
//! 64-bit outputs are fixed here so other implementations can reproduce a
//! catalog bit for bit:
//!
//! * uniform `f64` in `[0, 1)`: `(x >> 11) * 2^-53`
//! * integer in `[0, n)`: `(x * n) >> 64` on 128-bit products
//! * standard normal: Box–Muller, `sqrt(-2 ln(1 - u1)) * cos(2π u2)`, one
//!   value per two draws

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub struct SampleRng(Xoshiro256PlusPlus);

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer below `n`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range_inclusive(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }

    pub fn gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Index drawn with probability proportional to `weights`.
    pub fn weighted(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut x = self.next_f64() * total;
        for (i, w) in weights.iter().enumerate() {
            if x < *w {
                return i;
            }
            x -= w;
        }
        weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_pinned() {
        // First outputs for seed 0; changing these changes every catalog.
        let mut r = SampleRng::new(0);
        let first = r.next_u64();
        let mut again = SampleRng::new(0);
        assert_eq!(first, again.next_u64());
        assert_ne!(SampleRng::new(1).next_u64(), first);
    }

    #[test]
    fn conversions_stay_in_range() {
        let mut r = SampleRng::new(42);
        for _ in 0..10_000 {
            let f = r.next_f64();
            assert!((0.0..1.0).contains(&f));
            assert!(r.below(7) < 7);
            assert!((3..=5).contains(&r.range_inclusive(3, 5)));
            assert!(r.gaussian().is_finite());
        }
        assert_eq!(r.weighted(&[0.0, 1.0, 0.0]), 1);
    }

    #[test]
    fn gaussian_moments() {
        let mut r = SampleRng::new(7);
        let xs: Vec<f64> = (0..200_000).map(|_| r.gaussian()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.01, "{mean}");
        assert!((var - 1.0).abs() < 0.02, "{var}");
    }
}
