//! Empirical constants for `‖α‖_{d/(d−1)} ≤ C‖α‖_{D(1)}`, the power-rule
//! inequality behind it, and the bootstrap to `‖α‖_{2d/(d−2)} ≤ C′‖α‖_{D(2)}`.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::iso::{
    check_isd, isoperimetric_profile, IsdCheck, Strategy, Trend, DEFAULT_BUDGET, GROWTH_SLOPE,
};
use crate::cayley::{directed_edge_boundary, vertex_boundary_size, CayleyBall};
use crate::dirichlet::loglog_fit;
use crate::error::{Error, Result};
use crate::function::FormalSum;
use crate::group::{GroupElement, GroupModel};
use crate::sampling::{case_rng, random_sum, Coefficients};

/// Test families and the support region they live in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SobolevOptions {
    /// Random non-negative functions tested.
    pub samples: usize,
    /// All test functions are supported in `B_R` for this `R`.
    pub radius: u32,
    /// Largest support of a random function.
    pub max_support: usize,
    pub seed: u64,
}

impl Default for SobolevOptions {
    fn default() -> Self {
        SobolevOptions {
            samples: 500,
            radius: 8,
            max_support: 256,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Maximizer {
    pub family: String,
    pub label: String,
    pub support: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyTrend {
    pub family: String,
    /// `(size parameter, ratio)`.
    pub ratios: Vec<(usize, f64)>,
    pub tail_slope: Option<f64>,
    pub trend: Trend,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevP2 {
    /// `2C(2d−2)/(d−2)`.
    pub c_prime: f64,
    pub tested: usize,
    pub violations: usize,
    /// Largest `‖α‖_{2d/(d−2)} / ‖α‖_{D(2)}` seen.
    pub max_ratio: f64,
    pub counterexamples: Vec<String>,
    /// Largest relative defect of the two exponent identities.
    pub exponent_identity_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevReport {
    pub group: String,
    pub d: f64,
    pub q: f64,
    /// Largest `‖α‖_q / ‖α‖_{D(1)}` over the test set; a lower bound for
    /// the true constant.
    pub constant: f64,
    pub maximizer: Maximizer,
    pub tested: usize,
    pub families: Vec<FamilyTrend>,
    /// Largest defect of `‖1_A‖_q = |A|^{1/q}` and
    /// `‖1_A‖_{D(1)} = 2·#{(x, g) : x ∈ A, xg ∉ A}`.
    pub indicator_bridge_error: f64,
    pub options: SobolevOptions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p2: Option<SobolevP2>,
}

struct Candidate {
    family: &'static str,
    label: String,
    size: usize,
    f: FormalSum<f64>,
}

fn ratio(group: &GroupModel, f: &FormalSum<f64>, q: f64) -> Option<f64> {
    let den = f.seminorm(group, 1.0);
    (den > 0.0).then(|| f.lp_norm(q) / den)
}

pub fn sobolev_constant(
    group: &GroupModel,
    d: f64,
    opts: &SobolevOptions,
) -> Result<SobolevReport> {
    if !(d > 1.0) {
        return Err(Error::InvalidParameter(format!("S_d needs d > 1, got {d}")));
    }
    let q = d / (d - 1.0);
    let ball = CayleyBall::build(group, opts.radius)?;
    let mut candidates = Vec::new();

    // indicators: word balls and greedy prefixes inside the region
    let mut sizes = Vec::new();
    let mut acc = 0;
    for (r, s) in ball.sphere_sizes().iter().enumerate() {
        acc += s;
        sizes.push((r, acc));
    }
    for &(r, n) in &sizes {
        let set: Vec<GroupElement> = ball.elements()[..n].to_vec();
        candidates.push(Candidate {
            family: "indicator",
            label: format!("ball B_{r}"),
            size: n,
            f: FormalSum::indicator(&set, 1.0),
        });
    }
    let greedy = isoperimetric_profile(
        group,
        ball.len().min(4096),
        Strategy::Greedy,
        DEFAULT_BUDGET,
    )?;
    let mut n = 1;
    while n <= greedy.records.len() {
        let rec = &greedy.records[n - 1];
        if rec
            .witness_elements
            .iter()
            .all(|x| ball.index_of(x).is_some())
        {
            candidates.push(Candidate {
                family: "indicator",
                label: format!("greedy set of size {n}"),
                size: n,
                f: FormalSum::indicator(&rec.witness_elements, 1.0),
            });
        }
        n = if n < 16 { n + 1 } else { n + n / 4 };
    }

    // tents k − |x| supported on B_{k−1}
    for k in 1..=opts.radius as usize {
        let f: FormalSum<f64> = (0..ball.len())
            .filter(|&i| (ball.word_length(i) as usize) < k)
            .map(|i| {
                (
                    ball.element(i).clone(),
                    (k - ball.word_length(i) as usize) as f64,
                )
            })
            .collect();
        candidates.push(Candidate {
            family: "tent",
            label: format!("tent of height {k}"),
            size: k,
            f,
        });
    }

    // random non-negative functions
    let randoms: Vec<Candidate> = (0..opts.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(opts.seed, "sobolev", i as u64);
            let size = rng.random_range(1..=opts.max_support.min(ball.len()).max(1));
            Candidate {
                family: "random",
                label: format!("random sample {i}"),
                size,
                f: random_sum(&ball, &mut rng, size, Coefficients::NonNegative),
            }
        })
        .collect();
    candidates.extend(randoms);

    let ratios: Vec<Option<f64>> = candidates
        .par_iter()
        .map(|c| ratio(group, &c.f, q))
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in ratios.iter().enumerate() {
        if let Some(r) = *r {
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((i, r));
            }
        }
    }
    let (bi, constant) =
        best.ok_or_else(|| Error::InvalidInput("no nonzero test function".into()))?;
    let m = &candidates[bi];

    let families = ["indicator", "tent"]
        .iter()
        .map(|fam| {
            let mut pts: Vec<(usize, f64)> = candidates
                .iter()
                .zip(&ratios)
                .filter(|(c, _)| c.family == *fam)
                .filter_map(|(c, r)| r.map(|r| (c.size, r)))
                .collect();
            pts.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
            pts.dedup_by_key(|p| p.0);
            family_trend(fam, pts)
        })
        .collect();

    let indicator_bridge_error = candidates
        .iter()
        .filter(|c| c.family == "indicator")
        .map(|c| indicator_bridge_defect(group, &c.f, d))
        .fold(0.0, f64::max);

    Ok(SobolevReport {
        group: group.spec(),
        d,
        q,
        constant,
        maximizer: Maximizer {
            family: m.family.into(),
            label: m.label.clone(),
            support: m.f.support_len(),
            ratio: constant,
        },
        tested: ratios.iter().flatten().count(),
        families,
        indicator_bridge_error,
        options: *opts,
        p2: None,
    })
}

fn family_trend(family: &str, ratios: Vec<(usize, f64)>) -> FamilyTrend {
    let pts: Vec<(f64, f64)> = ratios.iter().map(|&(n, r)| (n as f64, r)).collect();
    let tail_slope = if pts.len() >= 2 {
        loglog_fit(&pts[pts.len() / 2..]).map(|(s, _)| s)
    } else {
        None
    };
    FamilyTrend {
        family: family.into(),
        ratios,
        tail_slope,
        trend: match tail_slope {
            Some(s) if s > GROWTH_SLOPE => Trend::Growing,
            _ => Trend::Bounded,
        },
    }
}

/// `max(|‖1_A‖_q − |A|^{1/q}| / |A|^{1/q}, |‖1_A‖_{D(1)} − 2·edges|)`.
pub fn indicator_bridge_defect(group: &GroupModel, indicator: &FormalSum<f64>, d: f64) -> f64 {
    let q = d / (d - 1.0);
    let set: HashSet<GroupElement> = indicator.support().cloned().collect();
    let n = set.len() as f64;
    let lq = indicator.lp_norm(q);
    let expect = n.powf((d - 1.0) / d);
    let d1 = indicator.seminorm(group, 1.0);
    let edges = directed_edge_boundary(group, &set) as f64;
    ((lq - expect).abs() / expect).max((d1 - 2.0 * edges).abs())
}

/// Both sides of the power-rule inequality
/// `‖α^t‖_{D(1)} ≤ 2t Σ_x α^{t−1}(x) Σ_g |(α∗(g−1))(x)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma61Report {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

pub fn lemma61_check(group: &GroupModel, alpha: &FormalSum<f64>, t: f64) -> Result<Lemma61Report> {
    if !(t >= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "t must be at least 2, got {t}"
        )));
    }
    let lhs = alpha.power(t)?.seminorm(group, 1.0);
    let mut terms = Vec::with_capacity(alpha.support_len());
    for (x, a) in alpha.iter() {
        let mut jumps = 0.0;
        for j in 0..group.degree() {
            jumps += (alpha.get(&group.step_back(x, j)) - a).abs();
        }
        terms.push(a.powf(t - 1.0) * jumps);
    }
    let rhs = 2.0 * t * crate::scalar::tree_sum(&terms);
    let margin = rhs - lhs;
    Ok(Lemma61Report {
        t,
        lhs,
        rhs,
        margin,
        holds: margin >= -1e-12 * rhs.max(f64::MIN_POSITIVE),
    })
}

/// `(r^t − s^t, t(r^{t−1} + s^{t−1})(r − s))` for `0 ≤ s ≤ r`.
pub fn mean_value_step(r: f64, s: f64, t: f64) -> (f64, f64) {
    (
        r.powf(t) - s.powf(t),
        t * (r.powf(t - 1.0) + s.powf(t - 1.0)) * (r - s),
    )
}

/// Verification set for the `p = 2` bootstrap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct P2Options {
    pub samples: usize,
    pub radius: u32,
    pub max_support: usize,
    pub seed: u64,
}

impl Default for P2Options {
    fn default() -> Self {
        P2Options {
            samples: 500,
            radius: 8,
            max_support: 256,
            seed: 1,
        }
    }
}

pub fn p2_constant(c: f64, d: f64) -> f64 {
    2.0 * c * (2.0 * d - 2.0) / (d - 2.0)
}

/// Relative defects of `‖α^{(2d−2)/(d−2)}‖_{d/(d−1)} = ‖α^{2d/(d−2)}‖_1^{(d−1)/d}`
/// and `‖α‖_{2d/(d−2)}^{2d/(d−2)} = ‖α^{2d/(d−2)}‖_1`.
pub fn exponent_identity_defect(alpha: &FormalSum<f64>, d: f64) -> Result<f64> {
    let a = (2.0 * d - 2.0) / (d - 2.0);
    let b = 2.0 * d / (d - 2.0);
    let q = d / (d - 1.0);
    let ab = alpha.power(b)?.lp_norm(1.0);
    if ab == 0.0 {
        return Ok(0.0);
    }
    let lhs1 = alpha.power(a)?.lp_norm(q);
    let rhs1 = ab.powf((d - 1.0) / d);
    let lhs2 = alpha.lp_norm(b).powf(b);
    Ok(((lhs1 - rhs1).abs() / rhs1).max((lhs2 - ab).abs() / ab))
}

/// Completes `report` with `C′` and checks `‖α‖_{2d/(d−2)} ≤ C′‖α‖_{D(2)}`
/// on random non-negative functions.
pub fn sobolev_p2(
    mut report: SobolevReport,
    group: &GroupModel,
    opts: &P2Options,
) -> Result<SobolevReport> {
    let d = report.d;
    if !(d > 2.0) {
        return Err(Error::InvalidParameter(format!(
            "the p = 2 bootstrap needs d > 2, got {d}"
        )));
    }
    let c_prime = p2_constant(report.constant, d);
    let r = 2.0 * d / (d - 2.0);
    let ball = CayleyBall::build(group, opts.radius)?;
    let results: Vec<Result<(f64, bool, f64, String)>> = (0..opts.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(opts.seed, "sobolev-p2", i as u64);
            let size = rng.random_range(1..=opts.max_support.min(ball.len()).max(1));
            let f = random_sum(&ball, &mut rng, size, Coefficients::NonNegative);
            let lhs = f.lp_norm(r);
            let d2 = f.seminorm(group, 2.0);
            let ok = lhs <= c_prime * d2 * (1.0 + 1e-12);
            let ratio = if d2 > 0.0 { lhs / d2 } else { 0.0 };
            let defect = exponent_identity_defect(&f, d)?;
            Ok((
                ratio,
                ok,
                defect,
                format!("sample {i}: ‖α‖ = {lhs}, C′‖α‖_D(2) = {}", c_prime * d2),
            ))
        })
        .collect();
    let mut p2 = SobolevP2 {
        c_prime,
        tested: 0,
        violations: 0,
        max_ratio: 0.0,
        counterexamples: Vec::new(),
        exponent_identity_error: 0.0,
    };
    for res in results {
        let (ratio, ok, defect, text) = res?;
        p2.tested += 1;
        p2.max_ratio = p2.max_ratio.max(ratio);
        p2.exponent_identity_error = p2.exponent_identity_error.max(defect);
        if !ok {
            p2.violations += 1;
            if p2.counterexamples.len() < 5 {
                p2.counterexamples.push(text);
            }
        }
    }
    report.p2 = Some(p2);
    Ok(report)
}

/// One indicator seen from both sides: vertex boundary and directed edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeRow {
    pub n: usize,
    pub vertex_boundary: usize,
    pub directed_edges: usize,
    /// `|A|^{(d−1)/d} / |∂A|`.
    pub is_ratio: f64,
    /// `‖1_A‖_q / ‖1_A‖_{D(1)}`.
    pub s_ratio: f64,
    /// `2·edges / |∂A|`, between 2 and `2|S|`.
    pub factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceProbe {
    pub group: String,
    pub d: f64,
    pub isd: IsdCheck,
    pub sobolev: SobolevReport,
    pub bridge: Vec<BridgeRow>,
    pub max_factor: f64,
    pub is_consistent: bool,
    pub s_consistent: bool,
    pub agree: bool,
}

/// `(IS)_d` on the ball family next to `S_d` on the standard test set.
pub fn is_equivalence_probe(
    group: &GroupModel,
    d: f64,
    n_max: usize,
    opts: &SobolevOptions,
) -> Result<EquivalenceProbe> {
    let profile = isoperimetric_profile(group, n_max, Strategy::BallFamily, DEFAULT_BUDGET)?;
    let isd = check_isd(&profile, d)?;
    let sobolev = sobolev_constant(group, d, opts)?;
    let q = d / (d - 1.0);
    let bridge: Vec<BridgeRow> = profile
        .records
        .iter()
        .filter(|r| !r.witness_elements.is_empty())
        .map(|r| {
            let set: HashSet<GroupElement> = r.witness_elements.iter().cloned().collect();
            let f = FormalSum::indicator(&r.witness_elements, 1.0);
            let edges = directed_edge_boundary(group, &set);
            let vb = vertex_boundary_size(group, &set);
            BridgeRow {
                n: r.n,
                vertex_boundary: vb,
                directed_edges: edges,
                is_ratio: (r.n as f64).powf((d - 1.0) / d) / vb as f64,
                s_ratio: f.lp_norm(q) / f.seminorm(group, 1.0),
                factor: 2.0 * edges as f64 / vb as f64,
            }
        })
        .collect();
    let max_factor = bridge.iter().map(|b| b.factor).fold(0.0, f64::max);
    let is_consistent = isd.trend == Trend::Bounded;
    let s_consistent = sobolev.families.iter().all(|f| f.trend == Trend::Bounded);
    Ok(EquivalenceProbe {
        group: group.spec(),
        d,
        isd,
        sobolev,
        bridge,
        max_factor,
        is_consistent,
        s_consistent,
        agree: is_consistent == s_consistent,
    })
}
