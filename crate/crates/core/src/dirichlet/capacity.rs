//! Capacities of the identity relative to spheres, parabolicity scans and
//! the null sequence built from the capacity minimisers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solver::{EnergyProblem, SolverOptions};
use crate::cayley::CayleyBall;
use crate::error::{Error, Result};
use crate::function::{Exterior, FormalSum};
use crate::group::GroupModel;

/// `cap_p` is positive and nonincreasing in `R`; allow this much relative
/// slack for solver noise.
const MONOTONE_SLACK: f64 = 1e-7;

/// Thresholds turning a capacity sequence into a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Final capacity below this and still decaying: parabolic trend.
    pub small: f64,
    /// Final capacity above this and flattening: non-parabolic trend.
    pub large: f64,
    /// Magnitude of the tail log-log slope that counts as decay.
    pub decay_slope: f64,
    /// Relative change between the last two radii that counts as flat.
    pub flat_change: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            small: 0.05,
            large: 0.2,
            decay_slope: 0.1,
            flat_change: 0.01,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParabolicityVerdict {
    ParabolicTrend,
    NonParabolicTrend,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityEntry {
    #[serde(rename = "R")]
    pub radius: u32,
    pub capacity: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Minimiser as a formal sum (zero off the open ball).
    #[serde(skip)]
    pub minimizer: FormalSum<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityScan {
    pub group: String,
    pub p: f64,
    pub entries: Vec<CapacityEntry>,
    pub verdict: ParabolicityVerdict,
    /// Least-squares slope of `log cap` against `log R` over the tail.
    pub tail_slope: Option<f64>,
}

/// `cap_p(e, R)`: minimal `D(p)` energy of `u` with `u(e) = 1` and `u = 0`
/// on the sphere of radius `R`.
pub fn capacity(ball: &CayleyBall, p: f64, opts: &SolverOptions) -> Result<CapacityEntry> {
    if ball.radius() == 0 {
        return Err(Error::InvalidParameter("capacity needs R >= 1".into()));
    }
    let mut problem = EnergyProblem::new(ball, p, Exterior::BallOnly)?;
    let sphere: Vec<usize> = ball.sphere().collect();
    for i in sphere {
        problem.pin(i, 0.0);
    }
    problem.pin(0, 1.0);
    let report = problem.solve(opts)?;
    let values = report.minimizer.values();

    let tol = 1e-7;
    if let Some(bad) = values.iter().find(|v| !(-tol..=1.0 + tol).contains(*v)) {
        return Err(Error::Invariant(format!(
            "capacity minimiser leaves [0, 1]: {bad}"
        )));
    }
    let clamped: Vec<f64> = values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let clamped_energy = problem.energy(&clamped);
    if clamped_energy > report.energy * (1.0 + 1e-9) + 1e-15 {
        return Err(Error::Invariant(format!(
            "truncating the minimiser raised the energy from {} to {clamped_energy}",
            report.energy
        )));
    }

    Ok(CapacityEntry {
        radius: ball.radius(),
        capacity: report.energy,
        iterations: report.iterations,
        residual: report.residual,
        minimizer: report.minimizer.to_formal(),
    })
}

/// Capacities over a list of radii, computed concurrently, with a verdict.
pub fn parabolicity_scan(
    group: &GroupModel,
    p: f64,
    radii: &[u32],
    thresholds: &Thresholds,
    opts: &SolverOptions,
    max_vertices: usize,
) -> Result<CapacityScan> {
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
            capacity(&ball, p, opts)
        })
        .collect::<Result<Vec<_>>>()?;

    for w in entries.windows(2) {
        if w[1].capacity > w[0].capacity * (1.0 + MONOTONE_SLACK) {
            return Err(Error::Invariant(format!(
                "capacity increased from {} at R={} to {} at R={}",
                w[0].capacity, w[0].radius, w[1].capacity, w[1].radius
            )));
        }
    }
    let (verdict, tail_slope) = classify(&entries, thresholds);
    Ok(CapacityScan {
        group: group.spec(),
        p,
        entries,
        verdict,
        tail_slope,
    })
}

fn classify(entries: &[CapacityEntry], th: &Thresholds) -> (ParabolicityVerdict, Option<f64>) {
    let pts: Vec<(f64, f64)> = entries
        .iter()
        .map(|e| (e.radius as f64, e.capacity))
        .collect();
    if pts.len() < 2 {
        return (ParabolicityVerdict::Inconclusive, None);
    }
    let tail = &pts[pts.len() / 2..];
    let tail = if tail.len() < 2 {
        &pts[pts.len() - 2..]
    } else {
        tail
    };
    let slope = loglog_fit(tail).map(|(s, _)| s);
    let last = pts[pts.len() - 1].1;
    let prev = pts[pts.len() - 2].1;
    let change = (prev - last).abs() / prev.max(f64::MIN_POSITIVE);
    let verdict = match slope {
        Some(s) if last < th.small && s <= -th.decay_slope => ParabolicityVerdict::ParabolicTrend,
        _ if last > th.large && change < th.flat_change => ParabolicityVerdict::NonParabolicTrend,
        _ => ParabolicityVerdict::Inconclusive,
    };
    (verdict, slope)
}

/// Least-squares fit `log y = a + s log x`; returns `(s, a)`.
pub fn loglog_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = pts
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let s = sxy / sxx;
    Some((s, my - s * mx))
}

/// One term `β_n = n·α` of the null sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullTerm {
    pub n: u32,
    #[serde(rename = "R")]
    pub radius: u32,
    /// `‖α‖_{D(p)}` of the chosen minimiser.
    pub alpha_seminorm: f64,
    /// `‖β_n‖_{D(p)} = n‖α‖_{D(p)}`, required `≤ 1/n`.
    pub beta_seminorm: f64,
    /// `β_n(e) = n`.
    pub at_identity: f64,
    #[serde(skip)]
    pub beta: FormalSum<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullSequence {
    pub group: String,
    pub p: f64,
    pub terms: Vec<NullTerm>,
    /// Radius the fitted decay predicts for the next `n`, if the scan
    /// decays at all.
    pub next_radius_estimate: Option<f64>,
}

/// For each `n = 1, 2, ...` take the smallest scanned radius with
/// `‖α‖_{D(p)} ≤ 1/n²` and set `β_n = n·α`; stops at the first `n` the scan
/// cannot serve.
pub fn null_sequence(scan: &CapacityScan) -> Result<NullSequence> {
    if scan.verdict != ParabolicityVerdict::ParabolicTrend {
        return Err(Error::CannotSubsample(format!(
            "scan verdict is {:?}, not a parabolic trend",
            scan.verdict
        )));
    }
    let p = scan.p;
    let identity = GroupModel::from_spec(&scan.group)?.identity();
    let mut terms = Vec::new();
    let mut n = 1u32;
    loop {
        let target = 1.0 / (n as f64 * n as f64);
        let Some(entry) = scan
            .entries
            .iter()
            .find(|e| e.capacity.powf(1.0 / p) <= target)
        else {
            break;
        };
        let alpha_norm = entry.capacity.powf(1.0 / p);
        let beta = entry.minimizer.scale(n as f64);
        let beta_norm = n as f64 * alpha_norm;
        let at_e = beta.get(&identity);
        if beta_norm > 1.0 / n as f64 * (1.0 + 1e-12) || (at_e - n as f64).abs() > 1e-9 * n as f64 {
            return Err(Error::Invariant(format!(
                "null sequence term {n} violates its bounds"
            )));
        }
        terms.push(NullTerm {
            n,
            radius: entry.radius,
            alpha_seminorm: alpha_norm,
            beta_seminorm: beta_norm,
            at_identity: at_e,
            beta,
        });
        n += 1;
    }
    let next_radius_estimate = required_radius(scan, n);
    if terms.is_empty() {
        return Err(Error::CannotSubsample(format!(
            "no scanned capacity reaches ‖α‖ ≤ 1; estimated radius needed: {}",
            next_radius_estimate.map_or("unknown".into(), |r| format!("{r:.0}"))
        )));
    }
    Ok(NullSequence {
        group: scan.group.clone(),
        p,
        terms,
        next_radius_estimate,
    })
}

/// Radius at which `cap^{1/p}` should reach `1/n²`, from a log-log fit of
/// the whole scan.
fn required_radius(scan: &CapacityScan, n: u32) -> Option<f64> {
    let pts: Vec<(f64, f64)> = scan
        .entries
        .iter()
        .map(|e| (e.radius as f64, e.capacity))
        .collect();
    let (s, a) = loglog_fit(&pts)?;
    if s >= 0.0 {
        return None;
    }
    let target_cap = (1.0 / (n as f64 * n as f64)).powf(scan.p);
    Some(((target_cap.ln() - a) / s).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(spec: &str) -> GroupModel {
        GroupModel::from_spec(spec).unwrap()
    }

    #[test]
    fn z1_closed_form() {
        let g = model("Z^1");
        for p in [1.5, 2.0, 3.0, 4.0] {
            for r in [1u32, 2, 5, 16] {
                let ball = CayleyBall::build(&g, r).unwrap();
                let c = capacity(&ball, p, &SolverOptions::default()).unwrap();
                // two linear ramps of length R, each edge seen twice
                let expect = 4.0 * (r as f64).powf(1.0 - p);
                assert!(
                    (c.capacity - expect).abs() <= 1e-6 * expect,
                    "p={p} R={r}: {}",
                    c.capacity
                );
            }
        }
    }

    #[test]
    fn minimizer_in_unit_interval_and_monotone() {
        for spec in ["Z^2", "F_2", "H3"] {
            let g = model(spec);
            let scan = parabolicity_scan(
                &g,
                2.5,
                &[1, 2, 3, 4],
                &Thresholds::default(),
                &SolverOptions::default(),
                1 << 20,
            )
            .unwrap();
            for e in &scan.entries {
                assert!(e
                    .minimizer
                    .iter()
                    .all(|(_, v)| (-1e-9..=1.0 + 1e-9).contains(&v)));
            }
            for w in scan.entries.windows(2) {
                assert!(w[1].capacity <= w[0].capacity * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn free_group_capacity_stays_large() {
        let g = model("F_2");
        let scan = parabolicity_scan(
            &g,
            2.0,
            &[2, 4, 6, 8],
            &Thresholds::default(),
            &SolverOptions::default(),
            1 << 20,
        )
        .unwrap();
        assert_eq!(scan.verdict, ParabolicityVerdict::NonParabolicTrend);
    }

    #[test]
    fn z1_verdicts() {
        let g = model("Z^1");
        let radii: Vec<u32> = (2..=7).map(|k| 1 << k).collect();
        let scan = parabolicity_scan(
            &g,
            2.0,
            &radii,
            &Thresholds::default(),
            &SolverOptions::default(),
            1 << 20,
        )
        .unwrap();
        assert_eq!(scan.verdict, ParabolicityVerdict::ParabolicTrend);
        assert!((scan.tail_slope.unwrap() + 1.0).abs() < 1e-6);
    }

    #[test]
    fn null_sequence_on_z1() {
        let g = model("Z^1");
        let radii: Vec<u32> = (2..=10).map(|k| 1 << k).collect();
        let scan = parabolicity_scan(
            &g,
            2.0,
            &radii,
            &Thresholds::default(),
            &SolverOptions::default(),
            1 << 20,
        )
        .unwrap();
        let seq = null_sequence(&scan).unwrap();
        // cap = 4/R, need sqrt(4/R) <= 1/n^2, i.e. R >= 4 n^4
        let first_two: Vec<u32> = seq.terms.iter().map(|t| t.radius).take(2).collect();
        assert_eq!(first_two, vec![4, 64]);
        for t in &seq.terms {
            assert!(t.beta_seminorm <= 1.0 / t.n as f64 + 1e-12);
            assert_eq!(t.at_identity, t.n as f64);
        }
        let next = seq.next_radius_estimate.unwrap();
        let n = seq.terms.len() as f64 + 1.0;
        assert!((next / (4.0 * n.powi(4)) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn loglog_fit_exact() {
        let pts: Vec<(f64, f64)> = (1..6)
            .map(|k| (k as f64, 3.0 * (k as f64).powf(-1.5)))
            .collect();
        let (s, a) = loglog_fit(&pts).unwrap();
        assert!((s + 1.5).abs() < 1e-12 && (a - 3f64.ln()).abs() < 1e-12);
    }
}
