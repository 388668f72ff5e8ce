//! Seeded pseudo-random numbers with a fully specified algorithm.
//!
//! The generator is a 64-bit linear congruential generator
//!
//! ```text
//! state <- state * 6364136223846793005 + 1442695040888963407   (mod 2^64)
//! ```
//!
//! seeded with `state = seed`, advanced once before every draw. A uniform
//! double in `[0, 1)` is the top 53 bits of the new state times `2^-53`.
//! Standard normals use the Box-Muller cosine branch on two consecutive
//! uniforms `u1, u2`: `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`.
//!
//! Any implementation of the three lines above reproduces every random test
//! vector the CLI emits.

use nalgebra::{Complex, DVector};

const MULTIPLIER: u64 = 6364136223846793005;
const INCREMENT: u64 = 1442695040888963407;

#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT);
        self.state
    }

    /// Uniform integer in `[0, k)` from the high 32 bits (the low bits of a
    /// power-of-two LCG have short periods). `k` must be at most `2^32`.
    pub fn below(&mut self, k: u64) -> u64 {
        assert!(k > 0 && k <= 1 << 32, "bound out of range");
        ((self.next_u64() >> 32) * k) >> 32
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn normal_vector(&mut self, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.normal())
    }

    /// Complex vector with independent standard normal real and imaginary
    /// parts (real part drawn first), scaled to unit Euclidean norm.
    pub fn unit_complex_vector(&mut self, n: usize) -> DVector<Complex<f64>> {
        loop {
            let v = DVector::from_fn(n, |_, _| {
                let re = self.normal();
                let im = self.normal();
                Complex::new(re, im)
            });
            let norm = v.norm();
            if norm > 1e-12 {
                return v.unscale(norm);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn below_covers_small_ranges_evenly() {
        // the low bit of a power-of-two LCG alternates; below() must not
        let mut rng = Lcg64::new(5);
        let mut counts = [0usize; 4];
        for _ in 0..4000 {
            counts[rng.below(4) as usize] += 1;
        }
        assert!(counts.iter().all(|&c| (900..1100).contains(&c)), "{counts:?}");
        let mut pairs = [0usize; 4];
        for _ in 0..4000 {
            pairs[(rng.below(2) * 2 + rng.below(2)) as usize] += 1;
        }
        assert!(pairs.iter().all(|&c| c > 800), "{pairs:?}");
    }

    #[test]
    fn first_draws_are_pinned() {
        let mut rng = Lcg64::new(0);
        assert_eq!(rng.next_u64(), INCREMENT);
        assert_eq!(
            rng.next_u64(),
            INCREMENT.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT)
        );
    }

    #[test]
    fn uniform_stays_in_unit_interval() {
        let mut rng = Lcg64::new(42);
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn unit_vectors_have_unit_norm() {
        let mut rng = Lcg64::new(7);
        for n in 1..6 {
            let v = rng.unit_complex_vector(n);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = Lcg64::new(99);
        let mut b = Lcg64::new(99);
        for _ in 0..100 {
            assert_eq!(a.normal().to_bits(), b.normal().to_bits());
        }
    }
}
