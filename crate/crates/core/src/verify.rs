//! Seeded property suites for the inequalities and identities the library
//! implements. Each case draws from its own random stream, so the output
//! depends only on the seed, not on the number of worker threads.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cayley::CayleyBall;
use crate::dirichlet::{
    harmonic_extension, maximum_principle_check, null_sequence, parabolicity_scan, MaxPrinciple,
    SolverOptions, Thresholds,
};
use crate::error::{Error, Result};
use crate::function::{BallFunction, Exterior, FormalSum};
use crate::geometry::{
    lemma61_check, mean_value_step, sobolev_constant, sobolev_p2, P2Options, SobolevOptions,
};
use crate::group::{GroupElement, GroupModel};
use crate::sampling::{case_rng, random_complex_sum, random_sum, Coefficients};
use crate::scalar::Scalar;

pub const SUITES: [&str; 9] = [
    "norms",
    "cocycle",
    "lemma31",
    "lemma41",
    "lemma52",
    "prop53-holder",
    "lemma61",
    "prop62",
    "maxprinciple",
];

const FAMILIES: [&str; 4] = ["Z^2", "Z^3", "F_2", "H3"];
const EXAMPLES_KEPT: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
    pub counterexamples: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteOutcome>,
}

impl VerifyReport {
    /// Plain-text summary; byte-identical for identical inputs.
    pub fn render(&self) -> String {
        let mut out = format!("verify seed={}\n", self.seed);
        for s in &self.suites {
            out += &format!("[{}] {}\n", if s.passed { "PASS" } else { "FAIL" }, s.suite);
            for c in &s.checks {
                out += &format!("  {}: {}/{}\n", c.name, c.cases - c.failures, c.cases);
                for ex in &c.counterexamples {
                    out += &format!("    counterexample: {ex}\n");
                }
            }
        }
        let failed = self.suites.iter().filter(|s| !s.passed).count();
        if failed == 0 {
            out += "all suites passed\n";
        } else {
            out += &format!("{failed} suite(s) failed\n");
        }
        out
    }
}

/// Deliberate defects used to show that a suite can fail.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    None,
    /// Use `+Δ` where `−Δ` belongs in the pairing identity.
    FlipHarmonicSign,
}

pub fn verify(suite: &str, seed: u64) -> Result<VerifyReport> {
    verify_with_mutation(suite, seed, Mutation::None)
}

#[doc(hidden)]
pub fn verify_with_mutation(suite: &str, seed: u64, mutation: Mutation) -> Result<VerifyReport> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&suite) {
        vec![suite]
    } else {
        return Err(Error::UnknownSuite(suite.to_string()));
    };
    let mut suites = Vec::new();
    for name in names {
        let checks = match name {
            "norms" => norms(seed)?,
            "cocycle" => cocycle(seed)?,
            "lemma31" => lemma31()?,
            "lemma41" => lemma41(seed)?,
            "lemma52" => lemma52(seed, mutation)?,
            "prop53-holder" => holder(seed)?,
            "lemma61" => lemma61(seed)?,
            "prop62" => prop62(seed)?,
            "maxprinciple" => maxprinciple(seed)?,
            _ => unreachable!(),
        };
        suites.push(SuiteOutcome {
            suite: name.to_string(),
            passed: checks.iter().all(|c| c.failures == 0),
            checks,
        });
    }
    Ok(VerifyReport {
        seed,
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

/// Runs `n` cases in parallel; each returns `Some(description)` on failure.
fn run_cases<F>(name: &str, seed: u64, n: u64, case: F) -> Result<CheckOutcome>
where
    F: Fn(&mut ChaCha8Rng, u64) -> Result<Option<String>> + Sync,
{
    let results: Vec<Result<Option<String>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(seed, name, i);
            case(&mut rng, i)
        })
        .collect();
    let mut out = CheckOutcome {
        name: name.to_string(),
        cases: n,
        failures: 0,
        counterexamples: Vec::new(),
    };
    for r in results {
        if let Some(text) = r? {
            out.failures += 1;
            if out.counterexamples.len() < EXAMPLES_KEPT {
                out.counterexamples.push(text);
            }
        }
    }
    Ok(out)
}

fn single(name: &str, failure: Option<String>) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        cases: 1,
        failures: failure.is_some() as u64,
        counterexamples: failure.into_iter().collect(),
    }
}

struct Family {
    group: GroupModel,
    ball: CayleyBall,
}

fn families(specs: &[&str], radius: u32) -> Result<Vec<Family>> {
    specs
        .iter()
        .map(|s| {
            let group = GroupModel::from_spec(s)?;
            let ball = CayleyBall::build(&group, radius)?;
            Ok(Family { group, ball })
        })
        .collect()
}

fn show(group: &GroupModel, alpha: &FormalSum<f64>) -> String {
    let terms: Vec<String> = alpha
        .iter()
        .map(|(x, v)| format!("{}:{v}", group.format_element(x)))
        .collect();
    format!("{{{}}}", terms.join(", "))
}

fn random_word(rng: &mut ChaCha8Rng, degree: usize, max_len: usize) -> Vec<usize> {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| rng.random_range(0..degree)).collect()
}

fn norms(seed: u64) -> Result<Vec<CheckOutcome>> {
    let fams = families(&FAMILIES, 3)?;
    let ps = [1.0, 1.5, 2.0, 3.0];
    let identity = run_cases("norm identity", seed, 1000, |rng, i| {
        let f = &fams[i as usize % 4];
        let p = ps[(i as usize / 4) % 4];
        let size = rng.random_range(1..20);
        let report = if i % 2 == 0 {
            random_sum(&f.ball, rng, size, Coefficients::Real).norms(&f.group, p)?
        } else {
            random_complex_sum(&f.ball, rng, size).norms(&f.group, p)?
        };
        let defect = report.identity_defect();
        Ok((defect > 1e-12)
            .then(|| format!("{} p={p}: relative defect {defect:.3e}", f.group.spec())))
    })?;
    let homomorphism = run_cases("translation homomorphism", seed, 1000, |rng, i| {
        let f = &fams[[0usize, 2, 3][i as usize % 3]];
        let alpha = {
            let k = rng.random_range(1..15);
            random_sum(&f.ball, rng, k, Coefficients::Real)
        };
        let g = f.ball.element(rng.random_range(0..f.ball.len())).clone();
        let h = f.ball.element(rng.random_range(0..f.ball.len())).clone();
        let lhs = alpha.translate(&f.group, &g).translate(&f.group, &h);
        let rhs = alpha.translate(&f.group, &f.group.multiply(&g, &h));
        Ok((lhs != rhs).then(|| {
            format!(
                "{}: α={} g={} h={}",
                f.group.spec(),
                show(&f.group, &alpha),
                f.group.format_element(&g),
                f.group.format_element(&h)
            )
        }))
    })?;
    let contraction = run_cases("modulus contraction", seed, 1000, |rng, i| {
        let f = &fams[i as usize % 4];
        let p = ps[1 + (i as usize / 4) % 3];
        let alpha = {
            let k = rng.random_range(1..20);
            random_complex_sum(&f.ball, rng, k)
        };
        let a = alpha.modulus().seminorm(&f.group, p);
        let b = alpha.seminorm(&f.group, p);
        Ok((a > b * (1.0 + 1e-12))
            .then(|| format!("{} p={p}: ‖|α|‖ = {a} > ‖α‖ = {b}", f.group.spec())))
    })?;
    Ok(vec![identity, homomorphism, contraction])
}

fn cocycle(seed: u64) -> Result<Vec<CheckOutcome>> {
    let fams = families(&["Z^2", "F_2", "H3"], 3)?;
    let rule = run_cases("cocycle rule", seed, 1000, |rng, i| {
        let f = &fams[i as usize % 3];
        // integer coefficients keep every difference exact
        let alpha = {
            let k = rng.random_range(1..12);
            random_sum(&f.ball, rng, k, Coefficients::Integer)
        };
        let g = random_word(rng, f.group.degree(), 4);
        let h = random_word(rng, f.group.degree(), 4);
        let residual = alpha.cocycle_residual(&f.group, &g, &h);
        let view = alpha.cocycle_view(&f.group);
        let gh: Vec<usize> = g.iter().chain(&h).copied().collect();
        let extended = alpha.cocycle_extend(&f.group, &view, &gh);
        let ok = residual == 0.0 && extended == alpha.cocycle_direct(&f.group, &gh);
        Ok((!ok).then(|| {
            format!(
                "{}: α={} g={g:?} h={h:?} residual {residual}",
                f.group.spec(),
                show(&f.group, &alpha)
            )
        }))
    })?;
    let at_identity = run_cases("value at identity", seed, 300, |rng, i| {
        let f = &fams[i as usize % 3];
        let alpha = {
            let k = rng.random_range(1..12);
            random_sum(&f.ball, rng, k, Coefficients::Real)
        };
        let view = alpha.cocycle_view(&f.group);
        let ok = alpha.cocycle_direct(&f.group, &[]).is_zero()
            && alpha.cocycle_extend(&f.group, &view, &[]).is_zero();
        Ok((!ok).then(|| {
            format!(
                "{}: δ(e) ≠ 0 for α={}",
                f.group.spec(),
                show(&f.group, &alpha)
            )
        }))
    })?;
    Ok(vec![rule, at_identity])
}

/// Tent of height 1 on `[−20, 20]` in `Z^1`.
pub(crate) fn unit_tent(group: &GroupModel) -> FormalSum<f64> {
    (-20i64..=20)
        .map(|x| {
            let e = GroupElement::Lattice([x].into_iter().collect());
            debug_assert!(group.contains(&e));
            (e, 1.0 - x.abs() as f64 / 20.0)
        })
        .collect()
}

/// `‖α − min(α, β_n)‖_{D(2)}` for the null sequence of a `Z^1` scan.
pub fn truncation_distances(radii: &[u32]) -> Result<Vec<(u32, f64)>> {
    let group = GroupModel::from_spec("Z^1")?;
    let scan = parabolicity_scan(
        &group,
        2.0,
        radii,
        &Thresholds::default(),
        &SolverOptions::default(),
        crate::cayley::DEFAULT_MAX_VERTICES,
    )?;
    let seq = null_sequence(&scan)?;
    let alpha = unit_tent(&group);
    seq.terms
        .iter()
        .map(|t| {
            // minimisers are nonnegative up to solver noise
            let beta: FormalSum<f64> = t
                .beta
                .iter()
                .map(|(x, v)| (x.clone(), v.max(0.0)))
                .collect();
            Ok((
                t.n,
                alpha.sub(&alpha.truncate_min(&beta)?).seminorm(&group, 2.0),
            ))
        })
        .collect()
}

fn lemma31() -> Result<Vec<CheckOutcome>> {
    let radii: Vec<u32> = (2..=10).map(|k| 1 << k).collect();
    let group = GroupModel::from_spec("Z^1")?;
    let scan = parabolicity_scan(
        &group,
        2.0,
        &radii,
        &Thresholds::default(),
        &SolverOptions::default(),
        crate::cayley::DEFAULT_MAX_VERTICES,
    )?;
    let seq = null_sequence(&scan)?;
    let bad: Vec<String> = seq
        .terms
        .iter()
        .filter(|t| t.beta_seminorm > 1.0 / t.n as f64 + 1e-12 || t.at_identity != t.n as f64)
        .map(|t| {
            format!(
                "n={}: ‖β_n‖ = {}, β_n(e) = {}",
                t.n, t.beta_seminorm, t.at_identity
            )
        })
        .collect();
    let bounds = CheckOutcome {
        name: "null sequence bounds".into(),
        cases: seq.terms.len() as u64,
        failures: bad.len() as u64,
        counterexamples: bad.into_iter().take(EXAMPLES_KEPT).collect(),
    };
    let dist = truncation_distances(&radii)?;
    let last = dist.last().map_or(f64::INFINITY, |d| d.1);
    let failure = (dist.len() < 2 || last >= 1e-3).then(|| format!("distances {dist:?}"));
    Ok(vec![bounds, single("truncation convergence", failure)])
}

fn lemma41(seed: u64) -> Result<Vec<CheckOutcome>> {
    let small = families(&FAMILIES, 3)?;
    let large = families(&FAMILIES, 5)?;
    let ps = [1.5, 2.0, 3.0];
    let bound = run_cases("word-length bound", seed, 4000, |rng, i| {
        let k = i as usize % 4;
        let (f, big) = (&small[k], &large[k]);
        let p = ps[(i as usize / 4) % 3];
        let alpha = {
            let k = rng.random_range(1..12);
            random_sum(&f.ball, rng, k, Coefficients::Real)
        };
        let support: Vec<&GroupElement> = alpha
            .support()
            .filter(|x| !f.group.is_identity(x))
            .collect();
        let x = if !support.is_empty() && rng.random_bool(0.5) {
            support[rng.random_range(0..support.len())].clone()
        } else {
            big.ball
                .element(rng.random_range(1..big.ball.len()))
                .clone()
        };
        let n = big
            .ball
            .word_length(big.ball.index_of(&x).expect("inside the larger ball"))
            as f64;
        let norm = alpha.norms(&f.group, p)?.dirichlet;
        let lhs = alpha.get(&x).abs();
        let rhs = n.powf((p - 1.0) / p) * norm;
        Ok((lhs > rhs * (1.0 + 1e-12)).then(|| {
            format!(
                "{} p={p} x={} |x|={n}: |α(x)| = {lhs} > {rhs}",
                f.group.spec(),
                f.group.format_element(&x)
            )
        }))
    })?;
    let jensen = run_cases("power mean step", seed, 1000, |rng, i| {
        let p = ps[i as usize % 3];
        let n = rng.random_range(1..=10);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let lhs = a.iter().sum::<f64>().powf(p);
        let rhs = (n as f64).powf(p - 1.0) * a.iter().map(|v| v.powf(p)).sum::<f64>();
        Ok((lhs > rhs * (1.0 + 1e-12)).then(|| format!("p={p} a={a:?}")))
    })?;
    Ok(vec![bound, jensen])
}

fn lemma52(seed: u64, mutation: Mutation) -> Result<Vec<CheckOutcome>> {
    let fams = families(&FAMILIES, 4)?;
    let sign = match mutation {
        Mutation::None => -2.0,
        Mutation::FlipHarmonicSign => 2.0,
    };
    let identity = run_cases("pairing identity", seed, 4000, |rng, i| {
        let f = &fams[i as usize % 4];
        let alpha = {
            let k = rng.random_range(1..20);
            random_complex_sum(&f.ball, rng, k)
        };
        let y = f.ball.element(rng.random_range(0..f.ball.len())).clone();
        let lap = alpha.laplacian_at(&f.group, &y);
        let lhs = FormalSum::<Complex64>::delta(y.clone()).pairing(&alpha, &f.group);
        let err = (lhs - lap.conj() * sign).norm();
        Ok((err > 1e-12 * (1.0 + lap.norm())).then(|| {
            format!(
                "{} y={}: ⟨δ_y, α⟩ = {lhs}, Δα(y) = {lap}",
                f.group.spec(),
                f.group.format_element(&y)
            )
        }))
    })?;
    let agreement = run_cases("harmonicity via pairing", seed, 1000, |rng, i| {
        let f = &fams[i as usize % 4];
        let ball = &f.ball;
        let interior: Vec<usize> = ball.interior().collect();
        let window = match i % 4 {
            0 => BallFunction::from_fn(ball, Exterior::BallOnly, |_| 2.5),
            1 => {
                let data: Vec<f64> = (0..ball.len())
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect();
                harmonic_extension(
                    ball,
                    |x| data[ball.index_of(x).unwrap()],
                    2.0,
                    &SolverOptions::default(),
                )?
                .minimizer
            }
            _ => BallFunction::from_fn(ball, Exterior::BallOnly, |_| rng.random_range(-1.0..1.0)),
        };
        let tol = 1e-8;
        let a = window.is_harmonic(&interior, tol)?.harmonic;
        let b = window.harmonic_via_pairing(&interior, tol)?;
        let expected = i % 4 < 2;
        Ok((a != b || a != expected).then(|| {
            format!(
                "{} case {i}: Laplacian says {a}, pairing says {b}",
                f.group.spec()
            )
        }))
    })?;
    Ok(vec![identity, agreement])
}

fn holder(seed: u64) -> Result<Vec<CheckOutcome>> {
    let fams = families(&FAMILIES, 3)?;
    let ps = [1.5, 2.0, 3.0];
    let check = run_cases("Hölder bound", seed, 1000, |rng, i| {
        let f = &fams[i as usize % 4];
        let p = ps[(i as usize / 4) % 3];
        let a = {
            let k = rng.random_range(1..20);
            random_complex_sum(&f.ball, rng, k)
        };
        let b = {
            let k = rng.random_range(1..20);
            random_complex_sum(&f.ball, rng, k)
        };
        let rep = a.pairing_report(&b, &f.group, p)?;
        Ok((rep.modulus() > rep.holder_bound * (1.0 + 1e-12)).then(|| {
            format!(
                "{} p={p}: |⟨α,β⟩| = {} > {}",
                f.group.spec(),
                rep.modulus(),
                rep.holder_bound
            )
        }))
    })?;
    Ok(vec![check])
}

fn lemma61(seed: u64) -> Result<Vec<CheckOutcome>> {
    let fams = families(&["Z^2", "Z^3", "F_2"], 3)?;
    let ts = [2.0, 2.5, 3.0];
    let power = run_cases("power rule", seed, 1000, |rng, i| {
        let f = &fams[i as usize % 3];
        let t = ts[(i as usize / 3) % 3];
        let alpha = {
            let k = rng.random_range(1..20);
            random_sum(&f.ball, rng, k, Coefficients::NonNegative)
        };
        let rep = lemma61_check(&f.group, &alpha, t)?;
        Ok((!rep.holds).then(|| {
            format!(
                "{} t={t}: lhs {} > rhs {}",
                f.group.spec(),
                rep.lhs,
                rep.rhs
            )
        }))
    })?;
    let mvt =
        run_cases("mean value step", seed, 100_000, |rng, _| {
            let r = rng.random_range(0.0..=10.0);
            let s = rng.random_range(0.0..=r);
            let t = rng.random_range(2.0..=5.0);
            let (lhs, rhs) = mean_value_step(r, s, t);
            Ok((lhs > rhs * (1.0 + 1e-12) + 1e-12)
                .then(|| format!("r={r} s={s} t={t}: {lhs} > {rhs}")))
        })?;
    Ok(vec![power, mvt])
}

fn prop62(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut checks = Vec::new();
    for (spec, d, radius) in [("Z^3", 3.0, 8u32), ("H3", 4.0, 5)] {
        let group = GroupModel::from_spec(spec)?;
        let sob = sobolev_constant(
            &group,
            d,
            &SobolevOptions {
                radius,
                seed,
                ..Default::default()
            },
        )?;
        let rep = sobolev_p2(
            sob,
            &group,
            &P2Options {
                radius,
                seed: seed.wrapping_add(1),
                ..Default::default()
            },
        )?;
        let p2 = rep.p2.as_ref().expect("filled in");
        let expected = 2.0 * rep.constant * (2.0 * d - 2.0) / (d - 2.0);
        checks.push(single(
            &format!("{spec} bootstrap constant"),
            (p2.c_prime != expected)
                .then(|| format!("C′ = {} but 2C(2d−2)/(d−2) = {expected}", p2.c_prime)),
        ));
        checks.push(CheckOutcome {
            name: format!("{spec} p = 2 inequality"),
            cases: p2.tested as u64,
            failures: p2.violations as u64,
            counterexamples: p2.counterexamples.clone(),
        });
        checks.push(single(
            &format!("{spec} exponent identities"),
            (p2.exponent_identity_error > 1e-10)
                .then(|| format!("relative defect {:.3e}", p2.exponent_identity_error)),
        ));
        checks.push(single(
            &format!("{spec} indicator identities"),
            (rep.indicator_bridge_error > 1e-12)
                .then(|| format!("defect {:.3e}", rep.indicator_bridge_error)),
        ));
    }
    Ok(checks)
}

fn maxprinciple(seed: u64) -> Result<Vec<CheckOutcome>> {
    let fams = families(&["Z^2", "F_2", "H3"], 4)?;
    let random = run_cases("random harmonic extensions", seed, 300, |rng, i| {
        let f = &fams[i as usize % 3];
        let data: Vec<f64> = (0..f.ball.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let rep = harmonic_extension(
            &f.ball,
            |x| data[f.ball.index_of(x).unwrap()],
            2.0,
            &SolverOptions::default(),
        )?;
        let verdict = maximum_principle_check(&rep.minimizer, 1e-8)?;
        Ok((verdict != MaxPrinciple::Holds)
            .then(|| format!("{} case {i}: {verdict:?}", f.group.spec())))
    })?;

    let z2 = GroupModel::from_spec("Z^2")?;
    let ball = CayleyBall::build(&z2, 6)?;
    let coord = BallFunction::from_fn(&ball, Exterior::BallOnly, |x| match x {
        GroupElement::Lattice(v) => v[0] as f64,
        _ => 0.0,
    });
    let v = maximum_principle_check(&coord, 1e-12)?;
    let extrema_on_sphere = ball.sphere().any(|i| coord.value(i) == 6.0)
        && ball.sphere().any(|i| coord.value(i) == -6.0);
    let coordinate = single(
        "coordinate function",
        (v != MaxPrinciple::Holds || !extrema_on_sphere).then(|| format!("{v:?}")),
    );
    let bump = BallFunction::from_fn(&ball, Exterior::BallOnly, |x| {
        if z2.is_identity(x) {
            1.0
        } else {
            0.0
        }
    });
    let v = maximum_principle_check(&bump, 1e-12)?;
    let guard = single(
        "non-harmonic guard",
        (v != MaxPrinciple::Inapplicable).then(|| format!("{v:?}")),
    );
    Ok(vec![random, coordinate, guard])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(matches!(verify("lemma99", 0), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn lemma61_reports_thousand_cases() {
        let r = verify("lemma61", 7).unwrap();
        assert!(r.passed);
        assert!(r.render().contains("power rule: 1000/1000"));
    }

    #[test]
    fn sign_flip_is_caught() {
        let clean = verify("lemma52", 3).unwrap();
        assert!(clean.passed, "{}", clean.render());
        let bad = verify_with_mutation("lemma52", 3, Mutation::FlipHarmonicSign).unwrap();
        assert!(!bad.passed);
        assert!(bad.render().contains("counterexample"));
    }
}
