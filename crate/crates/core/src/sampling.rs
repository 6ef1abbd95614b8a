//! Seeded random test functions on balls.
//!
//! Every random stream is derived from `(seed, label, case)` so a case can
//! be regenerated on its own and results do not depend on scheduling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cayley::CayleyBall;
use crate::function::FormalSum;

/// Deterministic generator for case `case` of a run labelled `label`.
pub fn case_rng(seed: u64, label: &str, case: u64) -> ChaCha8Rng {
    // FNV-1a over the label keeps streams of different suites apart
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ h);
    rng.set_stream(case);
    rng
}

/// How coefficients are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficients {
    /// Uniform in `[0, 1)`.
    NonNegative,
    /// Uniform in `[-1, 1)`.
    Real,
    /// Integers in `[-4, 4]`, so sums and differences are exact.
    Integer,
}

/// A random formal sum on `ball` with about `size` support points.
pub fn random_sum(
    ball: &CayleyBall,
    rng: &mut impl Rng,
    size: usize,
    coeff: Coefficients,
) -> FormalSum<f64> {
    (0..size.max(1))
        .map(|_| {
            let i = rng.random_range(0..ball.len());
            let v = match coeff {
                Coefficients::NonNegative => rng.random_range(0.0..1.0),
                Coefficients::Real => rng.random_range(-1.0..1.0),
                Coefficients::Integer => rng.random_range(-4i32..=4) as f64,
            };
            (ball.element(i).clone(), v)
        })
        .collect()
}

pub fn random_complex_sum(
    ball: &CayleyBall,
    rng: &mut impl Rng,
    size: usize,
) -> FormalSum<Complex64> {
    (0..size.max(1))
        .map(|_| {
            let i = rng.random_range(0..ball.len());
            let v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (ball.element(i).clone(), v)
        })
        .collect()
}
