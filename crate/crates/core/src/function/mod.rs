//! Functions on a group: finitely supported formal sums `Σ a_x x` and dense
//! windows over a Cayley ball, with the difference operators `α ∗ (g − 1)`,
//! `L^p` and Dirichlet norms, the Laplacian and the sesquilinear pairing
//! `⟨α, β⟩ = Σ_x Σ_g (α∗(g−1))(x) · conj((β∗(g−1))(x))`.

mod formal;
mod window;

pub use formal::FormalSum;
pub use window::{BallFunction, Exterior};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest and largest exponent accepted from callers.
pub const MIN_EXPONENT: f64 = 1.0;
pub const MAX_EXPONENT: f64 = 16.0;

/// A validated exponent `p ∈ [1, 16]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if !(MIN_EXPONENT..=MAX_EXPONENT).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "exponent p = {p} outside [{MIN_EXPONENT}, {MAX_EXPONENT}]"
            )));
        }
        Ok(Exponent(p))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Conjugate index `q = p/(p−1)`; `p = 1` maps to `+∞`.
    pub fn conjugate(self) -> f64 {
        conjugate(self.0)
    }
}

pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// `(Σ |x_i|^p)^{1/p}` for finite `p`, `max |x_i|` for `p = ∞`, from a
/// precomputed sum of powers or maximum.
pub(crate) fn root(sum_or_max: f64, p: f64) -> f64 {
    if p.is_infinite() {
        sum_or_max
    } else {
        sum_or_max.powf(1.0 / p)
    }
}

/// All the norms of one function at one exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub p: f64,
    /// Conjugate index; `None` stands for `∞` (at `p = 1`).
    pub q: Option<f64>,
    /// `‖α‖_p`.
    pub lp: f64,
    /// `‖α‖_{D^p(G)} = (Σ_g ‖α∗(g−1)‖_p^p + |α(e)|^p)^{1/p}`.
    pub dirichlet: f64,
    /// `‖α‖_{D(p)}`, the quotient seminorm (no identity term).
    pub seminorm: f64,
    /// `|α(e)|`.
    pub at_identity: f64,
}

impl NormReport {
    pub(crate) fn assemble(p: Exponent, lp: f64, seminorm_pow: f64, at_identity: f64) -> Self {
        let pv = p.get();
        let full_pow = seminorm_pow + at_identity.powf(pv);
        let q = p.conjugate();
        NormReport {
            p: pv,
            q: q.is_finite().then_some(q),
            lp,
            dirichlet: full_pow.powf(1.0 / pv),
            seminorm: seminorm_pow.powf(1.0 / pv),
            at_identity,
        }
    }

    /// Relative defect of `‖α‖_{D^p}^p = ‖α‖_{D(p)}^p + |α(e)|^p`.
    pub fn identity_defect(&self) -> f64 {
        let lhs = self.dirichlet.powf(self.p);
        let rhs = self.seminorm.powf(self.p) + self.at_identity.powf(self.p);
        (lhs - rhs).abs() / lhs.max(f64::MIN_POSITIVE)
    }
}

/// Outcome of a harmonicity test on a finite domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCheck {
    pub harmonic: bool,
    /// `max |Δα(x)|` over the domain.
    pub max_residual: f64,
    /// `max | |S|·α(x) − Σ_g α(x g^{-1}) |`, evaluated separately.
    pub max_mean_value_residual: f64,
}

/// Value of the pairing plus bookkeeping for windowed inputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingReport {
    pub re: f64,
    pub im: f64,
    pub p: f64,
    pub q: Option<f64>,
    /// `‖α‖_{D(p)} · ‖β‖_{D(q)}`.
    pub holder_bound: f64,
    /// Difference terms dropped because one side could not be read.
    pub skipped_terms: usize,
    /// `Σ |α∗(g−1)(x)| · |β∗(g−1)(x)|`-style mass over the dropped terms
    /// where the readable side was nonzero.
    pub leaked_mass: f64,
}

impl PairingReport {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}
