//! Harmonic extensions of boundary data, a finite-ball view of the Royden
//! split `u = u_0 + h`, and the maximum principle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::capacity::loglog_fit;
use super::solver::{EnergyProblem, SolveReport, SolverOptions};
use crate::cayley::CayleyBall;
use crate::error::{Error, Result};
use crate::function::{BallFunction, Exterior};
use crate::group::{Family, GroupElement, GroupModel};

/// Minimiser of the `D(p)` energy on the ball that agrees with `boundary`
/// on the outer sphere. At `p = 2` it is harmonic on the interior.
pub fn harmonic_extension<'a>(
    ball: &'a CayleyBall,
    boundary: impl Fn(&GroupElement) -> f64,
    p: f64,
    opts: &SolverOptions,
) -> Result<SolveReport<'a>> {
    let mut problem = EnergyProblem::new(ball, p, Exterior::BallOnly)?;
    let sphere: Vec<usize> = ball.sphere().collect();
    for i in sphere {
        problem.pin(i, boundary(ball.element(i)));
    }
    problem.solve(opts)
}

/// Test functions whose harmonic part is probed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoydenSource {
    /// `1 / max(1, |x|_∞)` on `Z^d`.
    GreenLike,
    /// First coordinate on `Z^d` or `H3`.
    Coordinate,
    /// `±(1 − 2^{-|x|})` on `F_k`, signed by whether the reduced word starts
    /// with `a` or `A`, and `0` otherwise.
    EndSeparating,
    Constant,
}

impl std::str::FromStr for RoydenSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "green-like" => Ok(RoydenSource::GreenLike),
            "coordinate" => Ok(RoydenSource::Coordinate),
            "end-separating" => Ok(RoydenSource::EndSeparating),
            "constant" => Ok(RoydenSource::Constant),
            other => Err(Error::InvalidParameter(format!(
                "unknown source '{other}' (green-like, coordinate, end-separating, constant)"
            ))),
        }
    }
}

impl std::fmt::Display for RoydenSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RoydenSource::GreenLike => "green-like",
            RoydenSource::Coordinate => "coordinate",
            RoydenSource::EndSeparating => "end-separating",
            RoydenSource::Constant => "constant",
        })
    }
}

impl RoydenSource {
    pub fn check(self, group: &GroupModel) -> Result<()> {
        let ok = matches!(
            (self, group.family()),
            (RoydenSource::GreenLike, Family::Lattice { .. })
                | (
                    RoydenSource::Coordinate,
                    Family::Lattice { .. } | Family::Heisenberg
                )
                | (RoydenSource::EndSeparating, Family::Free { .. })
                | (RoydenSource::Constant, _)
        );
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "source {self} is not defined on {}",
                group.spec()
            )))
        }
    }

    pub fn value(self, x: &GroupElement) -> f64 {
        match (self, x) {
            (RoydenSource::Constant, _) => 1.0,
            (RoydenSource::GreenLike, GroupElement::Lattice(v)) => {
                let m = v.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0).max(1);
                1.0 / m as f64
            }
            (RoydenSource::Coordinate, GroupElement::Lattice(v)) => v[0] as f64,
            (RoydenSource::Coordinate, GroupElement::Heisenberg(v)) => v[0] as f64,
            (RoydenSource::EndSeparating, GroupElement::Word(w)) => {
                let sign = match w.first() {
                    Some(1) => 1.0,
                    Some(-1) => -1.0,
                    _ => 0.0,
                };
                sign * (1.0 - 0.5f64.powi(w.len() as i32))
            }
            _ => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoydenVerdict {
    HarmonicPartVanishing,
    HarmonicPartPersistent,
    EnergyDivergent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoydenEntry {
    #[serde(rename = "R")]
    pub radius: u32,
    /// `D(2)` energy of the harmonic extension `h_R`.
    pub energy: f64,
    pub min: f64,
    pub max: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoydenTrend {
    pub group: String,
    pub source: RoydenSource,
    pub entries: Vec<RoydenEntry>,
    pub verdict: RoydenVerdict,
}

/// Relative change between consecutive radii that counts as settled.
const SETTLED_CHANGE: f64 = 0.05;
/// Growth of the last energy over the first that counts as divergence.
const DIVERGENT_GROWTH: f64 = 1.5;

/// Harmonic extensions `h_R` of `source` restricted to each sphere, with
/// their energies and ranges.
pub fn royden_split(
    group: &GroupModel,
    source: RoydenSource,
    radii: &[u32],
    opts: &SolverOptions,
    max_vertices: usize,
) -> Result<RoydenTrend> {
    source.check(group)?;
    if radii.is_empty() {
        return Err(Error::InvalidParameter("empty radius schedule".into()));
    }
    let mut sorted = radii.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let entries = sorted
        .par_iter()
        .map(|&r| {
            let ball = CayleyBall::build_with_cap(group, r, max_vertices)?;
            let rep = harmonic_extension(&ball, |x| source.value(x), 2.0, opts)?;
            let vals = rep.minimizer.values();
            Ok(RoydenEntry {
                radius: r,
                energy: rep.energy,
                min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                iterations: rep.iterations,
                residual: rep.residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = classify(&entries);
    Ok(RoydenTrend {
        group: group.spec(),
        source,
        entries,
        verdict,
    })
}

fn classify(entries: &[RoydenEntry]) -> RoydenVerdict {
    let e: Vec<f64> = entries.iter().map(|x| x.energy).collect();
    if e.len() < 2 {
        return RoydenVerdict::Inconclusive;
    }
    let scale = e.iter().copied().fold(0.0, f64::max);
    if scale <= 1e-12 {
        return RoydenVerdict::HarmonicPartVanishing;
    }
    let (first, last, prev) = (e[0], e[e.len() - 1], e[e.len() - 2]);
    let increasing = e.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = e.windows(2).all(|w| w[1] <= w[0]);
    if increasing && last >= DIVERGENT_GROWTH * first {
        return RoydenVerdict::EnergyDivergent;
    }
    let pts: Vec<(f64, f64)> = entries
        .iter()
        .map(|x| (x.radius as f64, x.energy))
        .collect();
    let tail = &pts[pts.len() / 2..];
    let slope = loglog_fit(if tail.len() >= 2 { tail } else { &pts }).map(|(s, _)| s);
    let change = (last - prev).abs() / prev.max(f64::MIN_POSITIVE);
    match slope {
        Some(s) if decreasing && s <= -0.5 => RoydenVerdict::HarmonicPartVanishing,
        Some(s) if change < SETTLED_CHANGE && s.abs() < 0.5 => {
            RoydenVerdict::HarmonicPartPersistent
        }
        _ => RoydenVerdict::Inconclusive,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum MaxPrinciple {
    Holds,
    /// Largest excess of an interior value over the boundary maximum (or
    /// deficit below the boundary minimum).
    Violated {
        magnitude: f64,
    },
    /// Not harmonic on the interior, or no interior.
    Inapplicable,
}

/// `max_{B_R} u = max_{S_R} u` for `u` harmonic on the open ball.
pub fn maximum_principle_check(u: &BallFunction<'_, f64>, tol: f64) -> Result<MaxPrinciple> {
    let ball = u.ball();
    let interior: Vec<usize> = ball.interior().collect();
    if interior.is_empty() {
        return Ok(MaxPrinciple::Inapplicable);
    }
    if !u.is_harmonic(&interior, tol)?.harmonic {
        return Ok(MaxPrinciple::Inapplicable);
    }
    let (mut bmax, mut bmin) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in ball.sphere() {
        bmax = bmax.max(u.value(i));
        bmin = bmin.min(u.value(i));
    }
    let mut excess = 0.0f64;
    for &i in &interior {
        excess = excess.max(u.value(i) - bmax).max(bmin - u.value(i));
    }
    Ok(if excess > tol {
        MaxPrinciple::Violated { magnitude: excess }
    } else {
        MaxPrinciple::Holds
    })
}
