//! Seeded random streams and Gaussian sampling.
//!
//! Streams are ChaCha8 keyed from a 64-bit seed; normals come from the
//! Box–Muller transform. Child streams for parallel tasks are keyed by
//! `mix(parent_seed, index)` so results never depend on scheduling.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Seed of the `index`-th child stream of `parent`.
    pub fn child_seed(parent: u64, index: u64) -> u64 {
        splitmix64(parent ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
    }

    /// Independent stream for task `index`; does not advance `self`.
    pub fn derive(&self, index: u64) -> SeededRng {
        SeededRng::new(Self::child_seed(self.seed, index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `(0, 1]`.
    fn open_unit(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        self.inner.gen_range(0..bound)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let (z0, z1) = self.box_muller();
        self.spare = Some(z1);
        z0
    }

    #[inline]
    fn box_muller(&mut self) -> (f64, f64) {
        let u1 = self.open_unit();
        let u2 = self.uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let (s, c) = libm::sincos(TWO_PI * u2);
        (r * c, r * s)
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        let mut i = 0;
        if let Some(z) = self.spare.take() {
            if let Some(o) = out.first_mut() {
                *o = z;
                i = 1;
            } else {
                self.spare = Some(z);
                return;
            }
        }
        while i + 1 < out.len() {
            let (a, b) = self.box_muller();
            out[i] = a;
            out[i + 1] = b;
            i += 2;
        }
        if i < out.len() {
            out[i] = self.standard_normal();
        }
    }

    /// Uniformly random `k`-subset of `0..n`, sorted ascending.
    pub fn subset(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut s = rand::seq::index::sample(&mut self.inner, n, k).into_vec();
        s.sort_unstable();
        s
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `m × n` matrix of iid standard normal entries, filled row by row.
pub fn gaussian_matrix(rng: &mut SeededRng, m: usize, n: usize) -> Result<DenseMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::Dimension(format!("gaussian matrix needs m, n >= 1, got {m}x{n}")));
    }
    let mut data = vec![0.0; m * n];
    rng.fill_standard_normal(&mut data);
    DenseMatrix::new(m, n, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_seeds_give_identical_matrices() {
        let a = gaussian_matrix(&mut SeededRng::new(42), 10, 30).unwrap();
        let b = gaussian_matrix(&mut SeededRng::new(42), 10, 30).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        let c = gaussian_matrix(&mut SeededRng::new(43), 10, 30).unwrap();
        assert_ne!(a.as_slice(), c.as_slice());
    }

    #[test]
    fn sample_moments_within_three_sigma() {
        // mean: sd 1/sqrt(1000) ≈ 0.032; variance: sd sqrt(2/1000) ≈ 0.045
        let a = gaussian_matrix(&mut SeededRng::new(42), 1000, 1).unwrap();
        let v = a.as_slice();
        let mean = v.iter().sum::<f64>() / 1000.0;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 999.0;
        assert!((-0.1..=0.1).contains(&mean), "mean {mean}");
        assert!((0.9..=1.1).contains(&var), "var {var}");
    }

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(matches!(gaussian_matrix(&mut SeededRng::new(1), 0, 5), Err(Error::Dimension(_))));
        assert!(matches!(gaussian_matrix(&mut SeededRng::new(1), 5, 0), Err(Error::Dimension(_))));
    }

    #[test]
    fn fill_matches_scalar_draws() {
        let mut a = SeededRng::new(9);
        let mut b = SeededRng::new(9);
        let mut buf = [0.0; 7];
        a.fill_standard_normal(&mut buf);
        let scalar: Vec<f64> = (0..7).map(|_| b.standard_normal()).collect();
        assert_eq!(&buf[..], &scalar[..]);
    }

    #[test]
    fn derived_streams_are_stable_and_distinct() {
        let parent = SeededRng::new(7);
        assert_eq!(parent.derive(3).seed(), SeededRng::child_seed(7, 3));
        assert_ne!(parent.derive(3).seed(), parent.derive(4).seed());
        let mut x = parent.derive(0);
        let mut y = parent.derive(0);
        assert_eq!(x.next_u64(), y.next_u64());
    }

    #[test]
    fn subsets_are_sorted_and_distinct() {
        let mut rng = SeededRng::new(1);
        for _ in 0..50 {
            let s = rng.subset(30, 20);
            assert_eq!(s.len(), 20);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&i| i < 30));
        }
    }
}
