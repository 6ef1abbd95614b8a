//! Scalar abstraction over the real fast path and complex coefficients, plus
//! the fixed-shape summation tree every norm and pairing reduces through.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

/// Coefficient field for formal sums. Implemented for `f64` and `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + AddAssign
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    /// `None` when the imaginary part cannot be represented.
    fn from_parts(re: f64, im: f64) -> Option<Self>;

    fn is_zero(self) -> bool {
        self == Self::zero()
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn from_parts(re: f64, im: f64) -> Option<Self> {
        (im == 0.0).then_some(re)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(Complex64::new(re, im))
    }
}

/// Leaf size of the summation tree. Fixed so results never depend on the
/// number of worker threads.
const LEAF: usize = 1024;

fn pairwise<T: Scalar>(xs: &[T]) -> T {
    if xs.len() <= 8 {
        let mut acc = T::zero();
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise(&xs[..mid]) + pairwise(&xs[mid..])
}

/// Deterministic tree sum. Leaves of [`LEAF`] terms are summed pairwise
/// (possibly in parallel), then the leaf sums are combined pairwise.
pub fn tree_sum<T: Scalar>(xs: &[T]) -> T {
    if xs.len() <= LEAF {
        return pairwise(xs);
    }
    let leaves: Vec<T> = xs.par_chunks(LEAF).map(pairwise).collect();
    pairwise(&leaves)
}

/// `sum |x|^p` through the same tree.
pub fn tree_sum_pow<T: Scalar>(xs: &[T], p: f64) -> f64 {
    let terms: Vec<f64> = xs.iter().map(|x| x.modulus().powf(p)).collect();
    tree_sum(&terms)
}
