//! Experiment configs, dispatch to the library operations, and report files.
//!
//! A config names one operation and its parameters. [`run`] executes it and
//! returns an [`ExperimentReport`]; [`write_report`] stores the report as JSON
//! or CSV through a temporary file that is renamed into place.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cayley::{BallSummary, CayleyBall, DEFAULT_MAX_VERTICES};
use crate::dirichlet::{
    null_sequence, parabolicity_scan, royden_split, CapacityScan, NullSequence, RoydenSource,
    RoydenTrend, SolverOptions, Thresholds,
};
use crate::error::{Error, Result};
use crate::function::{FormalSum, PairingReport};
use crate::geometry::{
    check_isd, isoperimetric_profile, lemma61_check, sobolev_constant, sobolev_p2, Cutoff,
    IsdCheck, IsoperimetricProfile, Lemma61Report, P2Options, SobolevOptions, SobolevReport,
    Strategy, DEFAULT_BUDGET,
};
use crate::group::GroupModel;
use crate::verify::{verify, VerifyReport};

/// Bumped whenever a report field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    Ball,
    Capacity,
    Royden,
    Iso,
    Sobolev,
    Lemma61,
    Pairing,
    Verify,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidParameter(format!(
                "unknown format '{other}' (json, csv)"
            ))),
        }
    }
}

impl Format {
    /// Guess from a file extension; JSON unless it ends in `.csv`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Add(u32),
    Mul(u32),
}

/// Radii `start, start ⊕ step, …` up to and including `stop`, written
/// `start:stop`, `start:stop:+k` or `start:stop:*k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RadiusSchedule {
    pub start: u32,
    pub stop: u32,
    pub step: Step,
}

impl RadiusSchedule {
    pub fn radii(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut r = self.start;
        while r <= self.stop {
            out.push(r);
            let next = match self.step {
                Step::Add(k) => r.checked_add(k),
                Step::Mul(k) => r.checked_mul(k),
            };
            match next {
                Some(n) => r = n,
                None => break,
            }
        }
        out
    }
}

impl FromStr for RadiusSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidParameter(format!("radius schedule '{s}': {why}"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(bad("expected start:stop[:*factor|:+step]"));
        }
        let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad("not an integer"));
        let start = num(parts[0])?;
        let stop = num(parts[1])?;
        let step = match parts.get(2).map(|t| t.trim()) {
            None => Step::Add(1),
            Some(t) if t.starts_with('*') => Step::Mul(num(&t[1..])?),
            Some(t) if t.starts_with('+') => Step::Add(num(&t[1..])?),
            Some(t) => Step::Add(num(t)?),
        };
        if start == 0 {
            return Err(bad("radii start at 1"));
        }
        if stop < start {
            return Err(bad("stop is below start"));
        }
        match step {
            Step::Add(0) => return Err(bad("additive step must be positive")),
            Step::Mul(k) if k < 2 => return Err(bad("factor must be at least 2")),
            _ => {}
        }
        Ok(RadiusSchedule { start, stop, step })
    }
}

impl fmt::Display for RadiusSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Step::Add(1) => write!(f, "{}:{}", self.start, self.stop),
            Step::Add(k) => write!(f, "{}:{}:+{k}", self.start, self.stop),
            Step::Mul(k) => write!(f, "{}:{}:*{k}", self.start, self.stop),
        }
    }
}

impl TryFrom<String> for RadiusSchedule {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<RadiusSchedule> for String {
    fn from(r: RadiusSchedule) -> String {
        r.to_string()
    }
}

/// One experiment. Fields an operation does not use are ignored by it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub operation: Operation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<RadiusSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<RoydenSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Formal sum files in the `[{element, re, im}]` exchange format.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_vertices: Option<usize>,
    #[serde(default)]
    pub with_neighbors: bool,
    /// Also build the null sequence from a capacity scan.
    #[serde(default)]
    pub null_sequence: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl ExperimentConfig {
    /// A config for `operation` with every parameter at its default.
    pub fn new(operation: Operation) -> Self {
        ExperimentConfig {
            operation,
            group: None,
            p: None,
            d: None,
            radii: None,
            radius: None,
            samples: None,
            n_max: None,
            strategy: None,
            source: None,
            suite: None,
            t: None,
            alpha: None,
            beta: None,
            budget: None,
            max_vertices: None,
            with_neighbors: false,
            null_sequence: false,
            seed: 0,
            solver: SolverOptions::default(),
            thresholds: Thresholds::default(),
            output: None,
            format: Format::Json,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Reads a `.json` or `.toml` file (anything else is tried as TOML).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text),
            _ => Self::from_toml(&text),
        }
    }

    fn group_model(&self) -> Result<GroupModel> {
        let spec = self.group.as_deref().ok_or_else(|| missing("group"))?;
        GroupModel::from_spec(spec)
    }

    fn radius_list(&self) -> Result<Vec<u32>> {
        Ok(self.radii.ok_or_else(|| missing("radii"))?.radii())
    }

    fn vertex_cap(&self) -> usize {
        self.max_vertices.unwrap_or(DEFAULT_MAX_VERTICES)
    }
}

fn missing(field: &str) -> Error {
    Error::Config(format!("missing required field '{field}'"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityPayload {
    #[serde(flatten)]
    pub scan: CapacityScan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_sequence: Option<NullSequence>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoPayload {
    #[serde(flatten)]
    pub profile: IsoperimetricProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isd: Option<IsdCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma61Payload {
    pub group: String,
    pub support: usize,
    #[serde(flatten)]
    pub check: Lemma61Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingPayload {
    pub group: String,
    pub alpha_support: usize,
    pub beta_support: usize,
    #[serde(flatten)]
    pub report: PairingReport,
}

/// Operation-specific part of a report, tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    Ball(BallSummary),
    Capacity(CapacityPayload),
    Royden(RoydenTrend),
    Iso(IsoPayload),
    Sobolev(SobolevReport),
    Lemma61(Lemma61Payload),
    Pairing(PairingPayload),
    Verify(VerifyReport),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Solver iterations summed over all solves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_iterations: Option<usize>,
    /// Largest final residual reported by a solve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    /// Pairing mass lost at a window edge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_leakage: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped_terms: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub wall_time_seconds: f64,
    #[serde(flatten)]
    pub payload: Payload,
    pub diagnostics: Diagnostics,
}

impl ExperimentReport {
    /// Budget cutoff of an isoperimetric run, if it stopped early.
    pub fn cutoff(&self) -> Option<&Cutoff> {
        match &self.payload {
            Payload::Iso(iso) => iso.profile.cutoff.as_ref(),
            _ => None,
        }
    }

    /// `true` for a verification report with a failing suite.
    pub fn suite_failed(&self) -> bool {
        matches!(&self.payload, Payload::Verify(v) if !v.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// One row per radius, size or check.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        match &self.payload {
            Payload::Ball(b) => {
                w.write_record(["r", "sphere_size"]).map_err(csv_err)?;
                for (r, n) in b.sphere_sizes.iter().enumerate() {
                    w.serialize((r, n)).map_err(csv_err)?;
                }
            }
            Payload::Capacity(c) => {
                w.write_record(["R", "capacity", "iterations", "residual"])
                    .map_err(csv_err)?;
                for e in &c.scan.entries {
                    w.serialize((e.radius, e.capacity, e.iterations, e.residual))
                        .map_err(csv_err)?;
                }
            }
            Payload::Royden(t) => {
                w.write_record(["R", "energy", "min", "max", "iterations", "residual"])
                    .map_err(csv_err)?;
                for e in &t.entries {
                    w.serialize((e.radius, e.energy, e.min, e.max, e.iterations, e.residual))
                        .map_err(csv_err)?;
                }
            }
            Payload::Iso(iso) => {
                w.write_record(["n", "boundary", "exact", "visited"])
                    .map_err(csv_err)?;
                for r in &iso.profile.records {
                    let visited = r.visited.map(|v| v.to_string()).unwrap_or_default();
                    w.serialize((r.n, r.boundary, r.exact, visited))
                        .map_err(csv_err)?;
                }
            }
            Payload::Sobolev(s) => {
                w.write_record(["family", "size", "ratio"])
                    .map_err(csv_err)?;
                for f in &s.families {
                    for (n, ratio) in &f.ratios {
                        w.serialize((&f.family, n, ratio)).map_err(csv_err)?;
                    }
                }
            }
            Payload::Lemma61(l) => {
                w.write_record(["t", "lhs", "rhs", "margin", "holds"])
                    .map_err(csv_err)?;
                let c = &l.check;
                w.serialize((c.t, c.lhs, c.rhs, c.margin, c.holds))
                    .map_err(csv_err)?;
            }
            Payload::Pairing(p) => {
                w.write_record(["re", "im", "p", "holder_bound"])
                    .map_err(csv_err)?;
                let r = &p.report;
                w.serialize((r.re, r.im, r.p, r.holder_bound))
                    .map_err(csv_err)?;
            }
            Payload::Verify(v) => {
                w.write_record(["suite", "check", "cases", "failures"])
                    .map_err(csv_err)?;
                for s in &v.suites {
                    for c in &s.checks {
                        w.serialize((&s.suite, &c.name, c.cases, c.failures))
                            .map_err(csv_err)?;
                    }
                }
            }
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Writes `text` to `path` via a sibling temporary file and a rename, so
/// readers never see a half-written report.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_report(report: &ExperimentReport, path: &Path, format: Format) -> Result<()> {
    write_atomic(path, &report.render(format)?)
}

/// Executes `config` and assembles the report. Does not write any file.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut diagnostics = Diagnostics::default();
    let payload = match config.operation {
        Operation::Ball => {
            let group = config.group_model()?;
            let radius = config.radius.ok_or_else(|| missing("radius"))?;
            let ball = CayleyBall::build_with_cap(&group, radius, config.vertex_cap())?;
            Payload::Ball(ball.summary(config.with_neighbors))
        }
        Operation::Capacity => {
            let group = config.group_model()?;
            let p = config.p.unwrap_or(2.0);
            let scan = parabolicity_scan(
                &group,
                p,
                &config.radius_list()?,
                &config.thresholds,
                &config.solver,
                config.vertex_cap(),
            )?;
            diagnostics.solver_iterations = Some(scan.entries.iter().map(|e| e.iterations).sum());
            diagnostics.max_residual = scan.entries.iter().map(|e| e.residual).reduce(f64::max);
            let null_sequence = if config.null_sequence {
                Some(null_sequence(&scan)?)
            } else {
                None
            };
            Payload::Capacity(CapacityPayload {
                scan,
                null_sequence,
            })
        }
        Operation::Royden => {
            let group = config.group_model()?;
            if let Some(p) = config.p {
                if p != 2.0 {
                    return Err(Error::InvalidParameter(format!(
                        "royden splits are computed at p = 2, got p = {p}"
                    )));
                }
            }
            let source = config.source.ok_or_else(|| missing("source"))?;
            let trend = royden_split(
                &group,
                source,
                &config.radius_list()?,
                &config.solver,
                config.vertex_cap(),
            )?;
            diagnostics.solver_iterations = Some(trend.entries.iter().map(|e| e.iterations).sum());
            diagnostics.max_residual = trend.entries.iter().map(|e| e.residual).reduce(f64::max);
            Payload::Royden(trend)
        }
        Operation::Iso => {
            let group = config.group_model()?;
            let n_max = config.n_max.ok_or_else(|| missing("n_max"))?;
            let strategy = config.strategy.unwrap_or(Strategy::Exhaustive);
            let profile = isoperimetric_profile(
                &group,
                n_max,
                strategy,
                config.budget.unwrap_or(DEFAULT_BUDGET),
            )?;
            let isd = match config.d {
                Some(d) if !profile.records.is_empty() => Some(check_isd(&profile, d)?),
                _ => None,
            };
            if let Some(c) = &profile.cutoff {
                diagnostics
                    .warnings
                    .push(format!("stopped before n = {}: {}", c.n, c.reason));
            }
            Payload::Iso(IsoPayload { profile, isd })
        }
        Operation::Sobolev => {
            let group = config.group_model()?;
            let d = match config.d {
                Some(d) => d,
                None => group.family().growth_degree().ok_or_else(|| missing("d"))? as f64,
            };
            let defaults = SobolevOptions::default();
            let opts = SobolevOptions {
                samples: config.samples.unwrap_or(defaults.samples),
                radius: config.radius.unwrap_or(defaults.radius),
                max_support: defaults.max_support,
                seed: config.seed,
            };
            let mut report = sobolev_constant(&group, d, &opts)?;
            if d > 2.0 {
                let p2 = P2Options {
                    samples: opts.samples,
                    radius: opts.radius,
                    max_support: opts.max_support,
                    seed: config.seed.wrapping_add(1),
                };
                report = sobolev_p2(report, &group, &p2)?;
            }
            Payload::Sobolev(report)
        }
        Operation::Lemma61 => {
            let group = config.group_model()?;
            let alpha: FormalSum<f64> = match &config.alpha {
                Some(path) => FormalSum::from_json(&group, &std::fs::read_to_string(path)?)?,
                None => FormalSum::delta(group.identity()),
            };
            let check = lemma61_check(&group, &alpha, config.t.unwrap_or(2.0))?;
            Payload::Lemma61(Lemma61Payload {
                group: group.spec(),
                support: alpha.support_len(),
                check,
            })
        }
        Operation::Pairing => {
            let group = config.group_model()?;
            let load = |path: &Option<PathBuf>, name: &str| -> Result<FormalSum<Complex64>> {
                let path = path.as_ref().ok_or_else(|| missing(name))?;
                FormalSum::from_json(&group, &std::fs::read_to_string(path)?)
            };
            let alpha = load(&config.alpha, "alpha")?;
            let beta = load(&config.beta, "beta")?;
            let report = alpha.pairing_report(&beta, &group, config.p.unwrap_or(2.0))?;
            diagnostics.edge_leakage = Some(report.leaked_mass);
            diagnostics.skipped_terms = Some(report.skipped_terms);
            Payload::Pairing(PairingPayload {
                group: group.spec(),
                alpha_support: alpha.support_len(),
                beta_support: beta.support_len(),
                report,
            })
        }
        Operation::Verify => {
            let suite = config.suite.as_deref().unwrap_or("all");
            Payload::Verify(verify(suite, config.seed)?)
        }
    };
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        config: config.clone(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        payload,
        diagnostics,
    })
}
