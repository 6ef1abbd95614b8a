use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{root, Exponent, HarmonicCheck, NormReport, PairingReport};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel};
use crate::scalar::{tree_sum, Scalar};

/// A finitely supported function `α = Σ a_x x` on a group.
///
/// Coefficients are kept in a `BTreeMap`, so every reduction runs in the
/// canonical element order and is bit-reproducible. Zero coefficients are
/// never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSum<T: Scalar = f64> {
    coeffs: BTreeMap<GroupElement, T>,
}

impl<T: Scalar> Default for FormalSum<T> {
    fn default() -> Self {
        FormalSum {
            coeffs: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> FromIterator<(GroupElement, T)> for FormalSum<T> {
    /// Later entries overwrite earlier ones for the same element.
    fn from_iter<I: IntoIterator<Item = (GroupElement, T)>>(iter: I) -> Self {
        let mut out = FormalSum::zero();
        for (x, v) in iter {
            out.set(x, v);
        }
        out
    }
}

impl<T: Scalar> FormalSum<T> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `δ_y`.
    pub fn delta(y: GroupElement) -> Self {
        let mut out = Self::zero();
        out.set(y, T::from_real(1.0));
        out
    }

    /// `c · 1_A`.
    pub fn indicator<'a>(set: impl IntoIterator<Item = &'a GroupElement>, c: T) -> Self {
        set.into_iter().map(|x| (x.clone(), c)).collect()
    }

    pub fn get(&self, x: &GroupElement) -> T {
        self.coeffs.get(x).copied().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, x: GroupElement, v: T) {
        if v.is_zero() {
            self.coeffs.remove(&x);
        } else {
            self.coeffs.insert(x, v);
        }
    }

    fn add_at(&mut self, x: GroupElement, v: T) {
        let cur = self.get(&x);
        self.set(x, cur + v);
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, T)> + '_ {
        self.coeffs.iter().map(|(x, &v)| (x, v))
    }

    pub fn support(&self) -> impl Iterator<Item = &GroupElement> + '_ {
        self.coeffs.keys()
    }

    /// Drops coefficients with `|a_x| ≤ eps`.
    pub fn prune(&mut self, eps: f64) {
        self.coeffs.retain(|_, v| v.modulus() > eps);
    }

    pub fn scale(&self, c: T) -> Self {
        self.iter().map(|(x, v)| (x.clone(), c * v)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (x, v) in other.iter() {
            out.add_at(x.clone(), v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (x, v) in other.iter() {
            out.add_at(x.clone(), -v);
        }
        out
    }

    /// Largest `|α(x) − β(x)|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other)
            .iter()
            .map(|(_, v)| v.modulus())
            .fold(0.0, f64::max)
    }

    /// Right translation `α_g(x) = α(x g^{-1})`, i.e. `α_g(y g) = α(y)`.
    pub fn translate(&self, group: &GroupModel, g: &GroupElement) -> Self {
        self.iter()
            .map(|(y, v)| (group.multiply(y, g), v))
            .collect()
    }

    /// `(α ∗ (g_j − 1))(x) = α(x g_j^{-1}) − α(x)`.
    pub fn convolve_diff(&self, group: &GroupModel, j: usize) -> Self {
        self.translate(group, group.generator(j)).sub(self)
    }

    /// `(Δα)(x) = Σ_g (α(x g^{-1}) − α(x))`.
    pub fn laplacian(&self, group: &GroupModel) -> Self {
        let mut out = Self::zero();
        let deg = T::from_real(group.degree() as f64);
        for (y, v) in self.iter() {
            for g in group.generators() {
                out.add_at(group.multiply(y, g), v);
            }
            out.add_at(y.clone(), -(deg * v));
        }
        out
    }

    /// `Δα` at a single point.
    pub fn laplacian_at(&self, group: &GroupModel, x: &GroupElement) -> T {
        let here = self.get(x);
        let mut acc = T::zero();
        for j in 0..group.degree() {
            acc += self.get(&group.step_back(x, j)) - here;
        }
        acc
    }

    /// `‖α‖_p` (`p = ∞` allowed).
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.iter().map(|(_, v)| v.modulus()).fold(0.0, f64::max);
        }
        let terms: Vec<f64> = self.iter().map(|(_, v)| v.modulus().powf(p)).collect();
        tree_sum(&terms).powf(1.0 / p)
    }

    /// `Σ_g ‖α∗(g−1)‖_p^p` for finite `p`, `max_g ‖α∗(g−1)‖_∞` for `p = ∞`.
    pub fn seminorm_pow(&self, group: &GroupModel, p: f64) -> f64 {
        let mut terms = Vec::new();
        for j in 0..group.degree() {
            for (_, v) in self.convolve_diff(group, j).iter() {
                terms.push(if p.is_infinite() {
                    v.modulus()
                } else {
                    v.modulus().powf(p)
                });
            }
        }
        if p.is_infinite() {
            terms.into_iter().fold(0.0, f64::max)
        } else {
            tree_sum(&terms)
        }
    }

    /// `‖α‖_{D(p)}`; any `p ≥ 1` including `∞`.
    pub fn seminorm(&self, group: &GroupModel, p: f64) -> f64 {
        root(self.seminorm_pow(group, p), p)
    }

    pub fn norms(&self, group: &GroupModel, p: f64) -> Result<NormReport> {
        let p = Exponent::new(p)?;
        let semi = self.seminorm_pow(group, p.get());
        let at_e = self.get(&group.identity()).modulus();
        Ok(NormReport::assemble(p, self.lp_norm(p.get()), semi, at_e))
    }

    /// `max_{x ∈ domain} |Δα(x)|`, cross-checked against the mean-value form
    /// `|S|·α(x) = Σ_g α(x g^{-1})`.
    pub fn is_harmonic(
        &self,
        group: &GroupModel,
        domain: &[GroupElement],
        tol: f64,
    ) -> HarmonicCheck {
        let deg = T::from_real(group.degree() as f64);
        let mut max_residual = 0.0f64;
        let mut max_mean = 0.0f64;
        for x in domain {
            max_residual = max_residual.max(self.laplacian_at(group, x).modulus());
            let mut around = T::zero();
            for j in 0..group.degree() {
                around += self.get(&group.step_back(x, j));
            }
            max_mean = max_mean.max((deg * self.get(x) - around).modulus());
        }
        debug_assert!(
            (max_residual - max_mean).abs() <= 1e-9 * (1.0 + max_residual),
            "Laplacian and mean-value forms disagree: {max_residual} vs {max_mean}"
        );
        HarmonicCheck {
            harmonic: max_residual <= tol,
            max_residual,
            max_mean_value_residual: max_mean,
        }
    }

    /// `⟨α, β⟩ = Σ_x Σ_g (α∗(g−1))(x) · conj((β∗(g−1))(x))`.
    pub fn pairing(&self, other: &Self, group: &GroupModel) -> T {
        let mut terms = Vec::new();
        for j in 0..group.degree() {
            let da = self.convolve_diff(group, j);
            let db = other.convolve_diff(group, j);
            for (x, a) in da.iter() {
                let b = db.get(x);
                if !b.is_zero() {
                    terms.push(a * b.conj());
                }
            }
        }
        tree_sum(&terms)
    }

    /// Pairing together with the Hölder bound `‖α‖_{D(p)}·‖β‖_{D(q)}`.
    pub fn pairing_report(
        &self,
        other: &Self,
        group: &GroupModel,
        p: f64,
    ) -> Result<PairingReport> {
        let p = Exponent::new(p)?;
        let q = p.conjugate();
        let value = self.pairing(other, group);
        Ok(PairingReport {
            re: value.re(),
            im: value.im(),
            p: p.get(),
            q: q.is_finite().then_some(q),
            holder_bound: self.seminorm(group, p.get()) * other.seminorm(group, q),
            skipped_terms: 0,
            leaked_mass: 0.0,
        })
    }

    /// Harmonicity on `domain` decided through `⟨δ_y, α⟩ = 0`; uses the
    /// general pairing, not the Laplacian.
    pub fn harmonic_via_pairing(
        &self,
        group: &GroupModel,
        domain: &[GroupElement],
        tol: f64,
    ) -> bool {
        domain.iter().all(|y| {
            let d = FormalSum::<T>::delta(y.clone());
            d.pairing(self, group).modulus() <= 2.0 * tol
        })
    }

    /// `δ(g_j) = α ∗ (g_j − 1)` for every generator: the cocycle `Tα`.
    pub fn cocycle_view(&self, group: &GroupModel) -> Vec<Self> {
        (0..group.degree())
            .map(|j| self.convolve_diff(group, j))
            .collect()
    }

    /// `δ(w) = α ∗ (w − 1) = α_w − α` evaluated directly.
    pub fn cocycle_direct(&self, group: &GroupModel, word: &[usize]) -> Self {
        self.translate(group, &group.word(word)).sub(self)
    }

    /// `δ(w)` built from the generator values alone by the right-module
    /// cocycle rule `δ(g h) = δ(g) h + δ(h)`, peeling letters off the left.
    pub fn cocycle_extend(&self, group: &GroupModel, view: &[Self], word: &[usize]) -> Self {
        match word.split_first() {
            None => Self::zero(),
            Some((&first, rest)) => view[first]
                .translate(group, &group.word(rest))
                .add(&self.cocycle_extend(group, view, rest)),
        }
    }

    /// Largest pointwise violation of `δ(gh) = δ(g) h + δ(h)` for words `g`, `h`.
    pub fn cocycle_residual(&self, group: &GroupModel, g: &[usize], h: &[usize]) -> f64 {
        let gh: Vec<usize> = g.iter().chain(h).copied().collect();
        let lhs = self.cocycle_direct(group, &gh);
        let rhs = self
            .cocycle_direct(group, g)
            .translate(group, &group.word(h))
            .add(&self.cocycle_direct(group, h));
        lhs.max_abs_diff(&rhs)
    }

    /// `|α|`.
    pub fn modulus(&self) -> FormalSum<f64> {
        self.iter().map(|(x, v)| (x.clone(), v.modulus())).collect()
    }

    /// Serializable entries `{element, re, im}` in canonical order.
    pub fn to_entries(&self, group: &GroupModel) -> Vec<Entry> {
        self.iter()
            .map(|(x, v)| Entry {
                element: group.format_element(x),
                re: v.re(),
                im: v.im(),
            })
            .collect()
    }

    pub fn from_entries(group: &GroupModel, entries: &[Entry]) -> Result<Self> {
        let mut out = Self::zero();
        for e in entries {
            let x = group.parse_element(&e.element)?;
            let v = T::from_parts(e.re, e.im).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "complex coefficient at {} for a real function",
                    e.element
                ))
            })?;
            out.add_at(x, v);
        }
        Ok(out)
    }

    pub fn to_json(&self, group: &GroupModel) -> String {
        serde_json::to_string(&self.to_entries(group)).expect("entries always serialize")
    }

    pub fn from_json(group: &GroupModel, text: &str) -> Result<Self> {
        let entries: Vec<Entry> = serde_json::from_str(text)?;
        Self::from_entries(group, &entries)
    }
}

impl FormalSum<f64> {
    pub fn to_complex(&self) -> FormalSum<Complex64> {
        self.iter()
            .map(|(x, v)| (x.clone(), Complex64::new(v, 0.0)))
            .collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.iter().all(|(_, v)| v >= 0.0)
    }

    /// Pointwise `min(α, β)` of two non-negative real functions.
    pub fn truncate_min(&self, other: &Self) -> Result<Self> {
        if !self.is_nonnegative() || !other.is_nonnegative() {
            return Err(Error::InvalidInput(
                "truncation needs non-negative functions".into(),
            ));
        }
        // absent entries are 0 and min(·, 0) = 0, so only the common support survives
        Ok(self
            .iter()
            .filter_map(|(x, a)| {
                let b = other.get(x);
                (b != 0.0).then(|| (x.clone(), a.min(b)))
            })
            .collect())
    }

    /// `α^t` for non-negative `α` and `t ≥ 1`.
    pub fn power(&self, t: f64) -> Result<Self> {
        if t < 1.0 {
            return Err(Error::InvalidParameter(format!("power t = {t} below 1")));
        }
        if !self.is_nonnegative() {
            return Err(Error::InvalidInput("power of a negative value".into()));
        }
        Ok(self.iter().map(|(x, v)| (x.clone(), v.powf(t))).collect())
    }
}

/// One coefficient in the JSON exchange format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub element: String,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

// Elements are serialized through their normal-form string only when a
// group is at hand (see `to_entries`); the raw enum encoding below exists so
// reports can embed formal sums without a model.
impl<T: Scalar> Serialize for FormalSum<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw: Vec<(&GroupElement, f64, f64)> =
            self.iter().map(|(x, v)| (x, v.re(), v.im())).collect();
        raw.serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for FormalSum<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<(GroupElement, f64, f64)> = Vec::deserialize(d)?;
        let mut out = FormalSum::zero();
        for (x, re, im) in raw {
            let v = T::from_parts(re, im).ok_or_else(|| D::Error::custom("complex coefficient"))?;
            out.add_at(x, v);
        }
        Ok(out)
    }
}
