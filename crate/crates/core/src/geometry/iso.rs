//! Isoperimetric profiles `n ↦ min{|∂A| : |A| = n}` and the constant in
//! `|A|^{(d−1)/d} ≤ C·|∂A|`.

use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cayley::{vertex_boundary_size, CayleyBall};
use crate::dirichlet::loglog_fit;
use crate::error::{Error, Result};
use crate::group::{Family, GroupElement, GroupModel};

/// Largest `n` the exhaustive search accepts.
pub const EXHAUSTIVE_MAX: usize = 12;
/// Largest `n` for the heuristic strategies.
pub const HEURISTIC_MAX: usize = 100_000;
/// Default cap on the number of connected sets visited by the exhaustive
/// search.
pub const DEFAULT_BUDGET: u64 = 200_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Exhaustive,
    Greedy,
    BallFamily,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Strategy::Exhaustive),
            "greedy" => Ok(Strategy::Greedy),
            "ball-family" | "ball" => Ok(Strategy::BallFamily),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy '{other}' (exhaustive, greedy, ball-family)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricRecord {
    pub n: usize,
    /// Smallest `|∂A|` found for `|A| = n`.
    pub boundary: usize,
    pub strategy: Strategy,
    /// `true` when `boundary` is the minimum over connected sets containing
    /// `e`; heuristic records are upper bounds.
    pub exact: bool,
    /// Number of connected sets of this size visited (exhaustive only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub visited: Option<u64>,
    /// Normal forms of a set attaining `boundary`.
    pub witness: Vec<String>,
    #[serde(skip)]
    pub witness_elements: Vec<GroupElement>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    /// First size that could not be completed.
    pub n: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricProfile {
    pub group: String,
    pub strategy: Strategy,
    pub n_max: usize,
    pub records: Vec<IsoperimetricRecord>,
    /// Present when the budget ran out before `n_max`.
    pub cutoff: Option<Cutoff>,
}

pub fn isoperimetric_profile(
    group: &GroupModel,
    n_max: usize,
    strategy: Strategy,
    budget: u64,
) -> Result<IsoperimetricProfile> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let limit = match strategy {
        Strategy::Exhaustive => EXHAUSTIVE_MAX,
        _ => HEURISTIC_MAX,
    };
    if n_max > limit {
        return Err(Error::InvalidParameter(format!(
            "n_max = {n_max} exceeds the {strategy:?} limit {limit}"
        )));
    }
    let (records, cutoff) = match strategy {
        Strategy::Exhaustive => exhaustive(group, n_max, budget)?,
        Strategy::Greedy => (greedy(group, n_max), None),
        Strategy::BallFamily => (ball_family(group, n_max)?, None),
    };
    Ok(IsoperimetricProfile {
        group: group.spec(),
        strategy,
        n_max,
        records,
        cutoff,
    })
}

fn record(
    group: &GroupModel,
    n: usize,
    boundary: usize,
    strategy: Strategy,
    witness: Vec<GroupElement>,
    visited: Option<u64>,
) -> IsoperimetricRecord {
    IsoperimetricRecord {
        n,
        boundary,
        strategy,
        exact: strategy == Strategy::Exhaustive,
        visited,
        witness: witness.iter().map(|x| group.format_element(x)).collect(),
        witness_elements: witness,
    }
}

// ---------------------------------------------------------------------------
// exhaustive search

#[derive(Clone)]
struct Best {
    boundary: Vec<usize>,
    witness: Vec<Vec<u32>>,
    visited: Vec<u64>,
}

impl Best {
    fn new(n_max: usize) -> Self {
        Best {
            boundary: vec![usize::MAX; n_max + 1],
            witness: vec![Vec::new(); n_max + 1],
            visited: vec![0; n_max + 1],
        }
    }

    /// Merge in branch order: ties keep the earlier branch.
    fn merge(&mut self, other: &Best) {
        for n in 0..self.boundary.len() {
            self.visited[n] += other.visited[n];
            if other.boundary[n] < self.boundary[n] {
                self.boundary[n] = other.boundary[n];
                self.witness[n] = other.witness[n].clone();
            }
        }
    }
}

/// Redelmeier's enumeration of connected vertex sets containing `e`.
struct Search<'a> {
    ball: &'a CayleyBall,
    allowed: &'a [bool],
    n_max: usize,
    in_set: Vec<bool>,
    reached: Vec<bool>,
    /// In-set forward neighbours of each member.
    inner: Vec<u8>,
    members: Vec<u32>,
    boundary: usize,
    best: Best,
    visited: u64,
    budget: u64,
}

impl Search<'_> {
    fn add(&mut self, v: usize) {
        let deg = self.ball.degree() as u8;
        self.in_set[v] = true;
        self.members.push(v as u32);
        self.inner[v] = 0;
        for j in 0..self.ball.degree() {
            if let Some(w) = self.ball.forward(v, j) {
                if self.in_set[w] && w != v {
                    if self.inner[w] == deg - 1 {
                        self.boundary -= 1;
                    }
                    self.inner[w] += 1;
                    self.inner[v] += 1;
                }
            }
        }
        if self.inner[v] < deg {
            self.boundary += 1;
        }
    }

    fn remove(&mut self, v: usize) {
        let deg = self.ball.degree() as u8;
        if self.inner[v] < deg {
            self.boundary -= 1;
        }
        for j in 0..self.ball.degree() {
            if let Some(w) = self.ball.forward(v, j) {
                if self.in_set[w] && w != v {
                    self.inner[w] -= 1;
                    if self.inner[w] == deg - 1 {
                        self.boundary += 1;
                    }
                }
            }
        }
        self.in_set[v] = false;
        self.members.pop();
    }

    fn note(&mut self) -> bool {
        let n = self.members.len();
        self.visited += 1;
        self.best.visited[n] += 1;
        if self.boundary < self.best.boundary[n] {
            self.best.boundary[n] = self.boundary;
            self.best.witness[n] = self.members.clone();
        }
        self.visited <= self.budget
    }

    /// Vertices adjacent to `v` that become reachable for the first time.
    fn fresh_neighbours(&mut self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for j in 0..self.ball.degree() {
            if let Some(w) = self.ball.forward(v, j) {
                if self.allowed[w] && !self.reached[w] {
                    self.reached[w] = true;
                    out.push(w);
                }
            }
        }
        out
    }

    /// Returns `false` once the budget is exhausted.
    fn grow(&mut self, mut untried: Vec<usize>) -> bool {
        while let Some(v) = untried.pop() {
            self.add(v);
            if !self.note() {
                return false;
            }
            if self.members.len() < self.n_max {
                let fresh = self.fresh_neighbours(v);
                let mut next = untried.clone();
                next.extend(&fresh);
                let ok = self.grow(next);
                for &w in &fresh {
                    self.reached[w] = false;
                }
                if !ok {
                    return false;
                }
            }
            self.remove(v);
        }
        true
    }
}

fn exhaustive(
    group: &GroupModel,
    n_max: usize,
    budget: u64,
) -> Result<(Vec<IsoperimetricRecord>, Option<Cutoff>)> {
    let ball = CayleyBall::build(group, n_max as u32)?;
    // On Z^d keep one representative per translation class: e is the
    // lexicographically smallest member.
    let allowed: Vec<bool> = match group.family() {
        Family::Lattice { .. } => ball
            .elements()
            .iter()
            .map(|x| match x {
                GroupElement::Lattice(v) => {
                    v.iter().rev().find(|&&c| c != 0).is_none_or(|&c| c > 0)
                }
                _ => unreachable!(),
            })
            .collect(),
        _ => vec![true; ball.len()],
    };

    // Iterative deepening so that an exhausted budget still leaves every
    // completed size exact.
    let mut spent = 0u64;
    let mut complete: Option<(usize, Best)> = None;
    let mut cutoff = None;
    for m in 1..=n_max {
        match run_level(&ball, &allowed, m, budget - spent) {
            Some((best, used)) => {
                spent += used;
                complete = Some((m, best));
            }
            None => {
                cutoff = Some(Cutoff {
                    n: m,
                    reason: format!("budget of {budget} connected sets exhausted"),
                });
                break;
            }
        }
        if m == n_max {
            break;
        }
    }
    let Some((m, best)) = complete else {
        return Ok((Vec::new(), cutoff));
    };
    let records = (1..=m)
        .map(|n| {
            let w: Vec<GroupElement> = best.witness[n]
                .iter()
                .map(|&i| ball.element(i as usize).clone())
                .collect();
            record(
                group,
                n,
                best.boundary[n],
                Strategy::Exhaustive,
                w,
                Some(best.visited[n]),
            )
        })
        .collect();
    Ok((records, cutoff))
}

/// Full enumeration up to size `m`, split into first-level branches.
/// Returns `None` if `budget` is exceeded.
fn run_level(ball: &CayleyBall, allowed: &[bool], m: usize, budget: u64) -> Option<(Best, u64)> {
    let len = ball.len();
    let mut root = Search {
        ball,
        allowed,
        n_max: m,
        in_set: vec![false; len],
        reached: vec![false; len],
        inner: vec![0; len],
        members: Vec::new(),
        boundary: 0,
        best: Best::new(m),
        visited: 0,
        budget,
    };
    root.reached[0] = true;
    root.add(0);
    if !root.note() {
        return None;
    }
    if m == 1 {
        return Some((root.best, root.visited));
    }
    let first = root.fresh_neighbours(0);
    let k = first.len();
    let per_branch = (budget.saturating_sub(1)) / k.max(1) as u64;
    // branch i pops first[k-1-i] with first[..k-1-i] still untried
    let results: Vec<Option<(Best, u64)>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let mut s = Search {
                ball,
                allowed,
                n_max: m,
                in_set: root.in_set.clone(),
                reached: root.reached.clone(),
                inner: root.inner.clone(),
                members: root.members.clone(),
                boundary: root.boundary,
                best: Best::new(m),
                visited: 0,
                budget: per_branch,
            };
            let v = first[k - 1 - i];
            let untried_rest = first[..k - 1 - i].to_vec();
            // mimic one iteration of the root loop
            s.add(v);
            if !s.note() {
                return None;
            }
            if s.members.len() < m {
                let fresh = s.fresh_neighbours(v);
                let mut next = untried_rest;
                next.extend(&fresh);
                if !s.grow(next) {
                    return None;
                }
            }
            Some((s.best, s.visited))
        })
        .collect();
    let mut best = root.best;
    let mut used = root.visited;
    for r in results {
        let (b, u) = r?;
        best.merge(&b);
        used += u;
    }
    Some((best, used))
}

// ---------------------------------------------------------------------------
// heuristics

/// Grow `A` from `{e}` by adding the frontier vertex with the most
/// neighbours in `A`, earliest discovered first.
fn greedy(group: &GroupModel, n_max: usize) -> Vec<IsoperimetricRecord> {
    let deg = group.degree();
    // member -> number of generators leading outside A
    let mut out: HashMap<GroupElement, usize> = HashMap::new();
    // frontier vertex -> (neighbours in A, discovery index)
    let mut frontier: HashMap<GroupElement, (usize, usize)> = HashMap::new();
    let mut queue: BTreeSet<(Reverse<usize>, usize)> = BTreeSet::new();
    let mut by_index: Vec<GroupElement> = Vec::new();
    let mut order: Vec<GroupElement> = Vec::new();
    let mut boundary = 0usize;
    let mut records = Vec::with_capacity(n_max);

    let mut v = group.identity();
    for n in 1..=n_max {
        // insert v
        let mut inside = 0;
        for g in group.generators() {
            let w = group.multiply(&v, g);
            if let Some(c) = out.get_mut(&w) {
                inside += 1;
                *c -= 1;
                if *c == 0 {
                    boundary -= 1;
                }
            } else {
                let entry = frontier.entry(w.clone()).or_insert_with(|| {
                    by_index.push(w.clone());
                    (0, by_index.len() - 1)
                });
                queue.remove(&(Reverse(entry.0), entry.1));
                entry.0 += 1;
                queue.insert((Reverse(entry.0), entry.1));
            }
        }
        let outside = deg - inside;
        if outside > 0 {
            boundary += 1;
        }
        out.insert(v.clone(), outside);
        order.push(v.clone());
        records.push(record(
            group,
            n,
            boundary,
            Strategy::Greedy,
            Vec::new(),
            None,
        ));
        if n == n_max {
            break;
        }
        let &(c, idx) = queue.iter().next().expect("infinite group has a frontier");
        queue.remove(&(c, idx));
        v = by_index[idx].clone();
        frontier.remove(&v);
    }
    // witnesses are prefixes of the insertion order; keep them for small n
    for r in records.iter_mut() {
        if r.n <= 4096 {
            let w = order[..r.n].to_vec();
            r.witness = w.iter().map(|x| group.format_element(x)).collect();
            r.witness_elements = w;
        }
    }
    records
}

/// Cubes `{0..m−1}^d` on `Z^d`, word balls elsewhere.
fn ball_family(group: &GroupModel, n_max: usize) -> Result<Vec<IsoperimetricRecord>> {
    let mut records = Vec::new();
    match group.family() {
        Family::Lattice { dim } => {
            let mut m = 1usize;
            while m.pow(dim as u32) <= n_max {
                let cube = cube(dim, m);
                let set: HashSet<GroupElement> = cube.iter().cloned().collect();
                let b = vertex_boundary_size(group, &set);
                let w = if cube.len() <= 4096 { cube } else { Vec::new() };
                records.push(record(group, set.len(), b, Strategy::BallFamily, w, None));
                // every side up to 32, then roughly 3% steps
                m += (m / 32).max(1);
            }
        }
        _ => {
            let mut r = 0u32;
            loop {
                let ball = CayleyBall::build(group, r + 1)?;
                let inner: usize = ball.sphere_sizes()[..=r as usize].iter().sum();
                if inner > n_max {
                    break;
                }
                // members of B_r whose forward neighbour lies on sphere r+1
                let b = (0..inner)
                    .filter(|&i| {
                        (0..ball.degree()).any(|j| ball.forward(i, j).is_none_or(|k| k >= inner))
                    })
                    .count();
                let w: Vec<GroupElement> = if inner <= 4096 {
                    ball.elements()[..inner].to_vec()
                } else {
                    Vec::new()
                };
                records.push(record(group, inner, b, Strategy::BallFamily, w, None));
                r += 1;
            }
        }
    }
    Ok(records)
}

fn cube(dim: usize, m: usize) -> Vec<GroupElement> {
    let total = m.pow(dim as u32);
    (0..total)
        .map(|mut k| {
            let mut v = smallvec::SmallVec::<[i64; 4]>::new();
            for _ in 0..dim {
                v.push((k % m) as i64);
                k /= m;
            }
            GroupElement::Lattice(v)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// (IS)_d

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Bounded,
    Growing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsdCheck {
    pub d: f64,
    /// `max n^{(d−1)/d} / |∂A|` over the profile.
    pub constant: f64,
    pub argmax_n: usize,
    /// `(n, n^{(d−1)/d}/|∂A|)` per record.
    pub ratios: Vec<(usize, f64)>,
    /// Log-log slope of the ratios over the upper half of the records.
    pub tail_slope: Option<f64>,
    pub trend: Trend,
    pub verdict: String,
}

/// Slope above which a ratio sequence counts as growing.
pub const GROWTH_SLOPE: f64 = 0.05;

/// Best constant for `|A|^{(d−1)/d} ≤ C·|∂A|` on a profile and its trend.
pub fn check_isd(profile: &IsoperimetricProfile, d: f64) -> Result<IsdCheck> {
    if !(d > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "(IS)_d needs d > 1, got {d}"
        )));
    }
    if profile.records.is_empty() {
        return Err(Error::InvalidInput("empty isoperimetric profile".into()));
    }
    let ratios: Vec<(usize, f64)> = profile
        .records
        .iter()
        .map(|r| (r.n, (r.n as f64).powf((d - 1.0) / d) / r.boundary as f64))
        .collect();
    let (argmax_n, constant) =
        ratios.iter().copied().fold(
            (0, f64::NEG_INFINITY),
            |acc, x| if x.1 > acc.1 { x } else { acc },
        );
    let pts: Vec<(f64, f64)> = ratios.iter().map(|&(n, r)| (n as f64, r)).collect();
    let tail_slope = loglog_fit(&pts[pts.len() / 2..]).map(|(s, _)| s);
    let trend = match tail_slope {
        Some(s) if s > GROWTH_SLOPE => Trend::Growing,
        _ => Trend::Bounded,
    };
    let verdict = match trend {
        Trend::Bounded => format!("consistent with (IS)_{d}, C = {constant:.6}"),
        Trend::Growing => format!(
            "ratios grow (slope {:.3}); not consistent with (IS)_{d}",
            tail_slope.unwrap_or(0.0)
        ),
    };
    Ok(IsdCheck {
        d,
        constant,
        argmax_n,
        ratios,
        tail_slope,
        trend,
        verdict,
    })
}
