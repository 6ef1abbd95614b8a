use serde::{Deserialize, Serialize};

use super::{conjugate, root, Exponent, FormalSum, HarmonicCheck, NormReport, PairingReport};
use crate::cayley::CayleyBall;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::scalar::{tree_sum, Scalar};

/// How a window treats points outside its ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exterior {
    /// The function is extended by zero; every difference is readable and
    /// norms equal those of the globally extended function.
    ImplicitZero,
    /// Only edges with both endpoints in the ball exist.
    BallOnly,
}

/// Dense function over the vertices of a [`CayleyBall`].
#[derive(Clone, Debug)]
pub struct BallFunction<'a, T: Scalar = f64> {
    ball: &'a CayleyBall,
    values: Vec<T>,
    exterior: Exterior,
}

impl<'a, T: Scalar> BallFunction<'a, T> {
    pub fn new(ball: &'a CayleyBall, values: Vec<T>, exterior: Exterior) -> Result<Self> {
        if values.len() != ball.len() {
            return Err(Error::InvalidInput(format!(
                "window has {} values for a ball of {} vertices",
                values.len(),
                ball.len()
            )));
        }
        Ok(BallFunction {
            ball,
            values,
            exterior,
        })
    }

    pub fn zeros(ball: &'a CayleyBall, exterior: Exterior) -> Self {
        BallFunction {
            ball,
            values: vec![T::zero(); ball.len()],
            exterior,
        }
    }

    pub fn from_fn(
        ball: &'a CayleyBall,
        exterior: Exterior,
        mut f: impl FnMut(&GroupElement) -> T,
    ) -> Self {
        BallFunction {
            ball,
            values: ball.elements().iter().map(&mut f).collect(),
            exterior,
        }
    }

    /// Restriction of a formal sum to the ball (entries outside are dropped).
    pub fn from_formal(ball: &'a CayleyBall, alpha: &FormalSum<T>, exterior: Exterior) -> Self {
        Self::from_fn(ball, exterior, |x| alpha.get(x))
    }

    pub fn ball(&self) -> &'a CayleyBall {
        self.ball
    }

    pub fn exterior(&self) -> Exterior {
        self.exterior
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn value(&self, i: usize) -> T {
        self.values[i]
    }

    /// Nonzero entries as a formal sum (the implicit-zero extension).
    pub fn to_formal(&self) -> FormalSum<T> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.ball.element(i).clone(), v))
            .collect()
    }

    /// `α(x_i g_j^{-1})`, or `None` when it lies outside a ball-only window.
    #[inline]
    pub fn read(&self, i: usize, j: usize) -> Option<T> {
        match self.ball.neighbor(i, j) {
            Some(k) => Some(self.values[k]),
            None => match self.exterior {
                Exterior::ImplicitZero => Some(T::zero()),
                Exterior::BallOnly => None,
            },
        }
    }

    /// `(α ∗ (g_j − 1))` at each ball vertex. For ball-only windows the
    /// entries whose neighbour is outside are left at zero; their number is
    /// returned alongside.
    pub fn convolve_diff(&self, j: usize) -> (Self, usize) {
        let mut skipped = 0;
        let values = (0..self.ball.len())
            .map(|i| match self.read(i, j) {
                Some(v) => v - self.values[i],
                None => {
                    skipped += 1;
                    T::zero()
                }
            })
            .collect();
        (
            BallFunction {
                ball: self.ball,
                values,
                exterior: self.exterior,
            },
            skipped,
        )
    }

    /// `Δα` at every vertex whose neighbours are readable (zero elsewhere).
    pub fn laplacian(&self) -> Self {
        let values = (0..self.ball.len())
            .map(|i| self.laplacian_at(i).unwrap_or_else(T::zero))
            .collect();
        BallFunction {
            ball: self.ball,
            values,
            exterior: self.exterior,
        }
    }

    pub fn laplacian_at(&self, i: usize) -> Option<T> {
        let here = self.values[i];
        let mut acc = T::zero();
        for j in 0..self.ball.degree() {
            acc += self.read(i, j)? - here;
        }
        Some(acc)
    }

    /// `Σ_g ‖α∗(g−1)‖_p^p` over the window (max for `p = ∞`). With the
    /// implicit-zero convention the terms at exterior points `x_i g` are
    /// included, so this is the seminorm of the extended function.
    pub fn seminorm_pow(&self, p: f64) -> f64 {
        let term = |v: f64| if p.is_infinite() { v } else { v.powf(p) };
        let mut terms = Vec::with_capacity(self.ball.len() * self.ball.degree());
        for i in 0..self.ball.len() {
            for j in 0..self.ball.degree() {
                if let Some(v) = self.read(i, j) {
                    terms.push(term((v - self.values[i]).modulus()));
                }
            }
            if self.exterior == Exterior::ImplicitZero {
                let ext = self.ball.exterior_count(i);
                if ext > 0 && p.is_infinite() {
                    terms.push(self.values[i].modulus());
                } else if ext > 0 {
                    terms.push(ext as f64 * term(self.values[i].modulus()));
                }
            }
        }
        if p.is_infinite() {
            terms.into_iter().fold(0.0, f64::max)
        } else {
            tree_sum(&terms)
        }
    }

    pub fn seminorm(&self, p: f64) -> f64 {
        root(self.seminorm_pow(p), p)
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max);
        }
        let terms: Vec<f64> = self.values.iter().map(|v| v.modulus().powf(p)).collect();
        tree_sum(&terms).powf(1.0 / p)
    }

    pub fn norms(&self, p: f64) -> Result<NormReport> {
        let p = Exponent::new(p)?;
        Ok(NormReport::assemble(
            p,
            self.lp_norm(p.get()),
            self.seminorm_pow(p.get()),
            self.values[0].modulus(),
        ))
    }

    /// Harmonicity on the given vertices; every vertex must have readable
    /// neighbours.
    pub fn is_harmonic(&self, domain: &[usize], tol: f64) -> Result<HarmonicCheck> {
        let deg = T::from_real(self.ball.degree() as f64);
        let mut max_residual = 0.0f64;
        let mut max_mean = 0.0f64;
        for &i in domain {
            let lap = self.laplacian_at(i).ok_or_else(|| {
                Error::InvalidInput(format!("vertex {i} has unreadable neighbours"))
            })?;
            max_residual = max_residual.max(lap.modulus());
            let mut around = T::zero();
            for j in 0..self.ball.degree() {
                around += self.read(i, j).expect("checked above");
            }
            max_mean = max_mean.max((deg * self.values[i] - around).modulus());
        }
        Ok(HarmonicCheck {
            harmonic: max_residual <= tol,
            max_residual,
            max_mean_value_residual: max_mean,
        })
    }

    /// Directed difference terms `(x_i, g_j)` contributing to the pairing,
    /// plus the implicit exterior terms when both sides allow them.
    fn pairing_terms(
        &self,
        other: &Self,
        rows: impl Iterator<Item = usize>,
    ) -> (Vec<T>, usize, f64) {
        let mut terms = Vec::new();
        let mut skipped = 0;
        let mut leaked = 0.0;
        let both_zero_ext =
            self.exterior == Exterior::ImplicitZero && other.exterior == Exterior::ImplicitZero;
        for i in rows {
            for j in 0..self.ball.degree() {
                let da = self.read(i, j).map(|v| v - self.values[i]);
                let db = other.read(i, j).map(|v| v - other.values[i]);
                match (da, db) {
                    (Some(a), Some(b)) => {
                        if !(a.is_zero() || b.is_zero()) {
                            terms.push(a * b.conj());
                        }
                    }
                    (a, b) => {
                        skipped += 1;
                        leaked += a.or(b).map(|v| v.modulus()).unwrap_or(0.0);
                    }
                }
            }
            let ext = self.ball.exterior_count(i);
            if ext > 0 {
                // at y = x_i g (outside): α∗(g−1)(y) = α(x_i) under implicit zero
                if both_zero_ext {
                    terms.push(T::from_real(ext as f64) * self.values[i] * other.values[i].conj());
                } else {
                    skipped += ext;
                    let side = if self.exterior == Exterior::ImplicitZero {
                        self.values[i]
                    } else {
                        other.values[i]
                    };
                    leaked += ext as f64 * side.modulus();
                }
            }
        }
        (terms, skipped, leaked)
    }

    /// `⟨α, β⟩` over the window.
    pub fn pairing(&self, other: &Self) -> T {
        let (terms, _, _) = self.pairing_terms(other, 0..self.ball.len());
        tree_sum(&terms)
    }

    /// Pairing with Hölder bound and edge-leakage diagnostics.
    pub fn pairing_report(&self, other: &Self, p: f64) -> Result<PairingReport> {
        let p = Exponent::new(p)?;
        let q = conjugate(p.get());
        let (terms, skipped, leaked) = self.pairing_terms(other, 0..self.ball.len());
        let value = tree_sum(&terms);
        Ok(PairingReport {
            re: value.re(),
            im: value.im(),
            p: p.get(),
            q: q.is_finite().then_some(q),
            holder_bound: self.seminorm(p.get()) * other.seminorm(q),
            skipped_terms: skipped,
            leaked_mass: leaked,
        })
    }

    /// `⟨δ_y, α⟩` for a ball vertex `y`, summed over the support of the
    /// differences of `δ_y` (the vertex itself and its neighbours).
    pub fn delta_pairing(&self, y: usize) -> Result<T> {
        let mut delta = BallFunction::<T>::zeros(self.ball, Exterior::ImplicitZero);
        delta.values[y] = T::from_real(1.0);
        let mut rows = vec![y];
        for j in 0..self.ball.degree() {
            match self.ball.forward(y, j) {
                Some(k) => rows.push(k),
                None => {
                    return Err(Error::InvalidInput(format!(
                        "vertex {y} is on the outer sphere"
                    )));
                }
            }
        }
        // skipped terms (at the far neighbours of y) have a zero δ_y side
        let (terms, _, _) = delta.pairing_terms(self, rows.into_iter());
        Ok(tree_sum(&terms))
    }

    /// Harmonicity decided through `⟨δ_y, α⟩ = 0` for every `y` in the domain.
    pub fn harmonic_via_pairing(&self, domain: &[usize], tol: f64) -> Result<bool> {
        for &y in domain {
            if self.delta_pairing(y)?.modulus() > 2.0 * tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl<'a> BallFunction<'a, f64> {
    pub fn truncate_min(&self, other: &Self) -> Result<Self> {
        if self.values.iter().chain(&other.values).any(|&v| v < 0.0) {
            return Err(Error::InvalidInput(
                "truncation needs non-negative functions".into(),
            ));
        }
        Ok(BallFunction {
            ball: self.ball,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.min(*b))
                .collect(),
            exterior: self.exterior,
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        BallFunction {
            ball: self.ball,
            values: self.values.iter().map(|v| c * v).collect(),
            exterior: self.exterior,
        }
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}
