//! Run configuration, verification suites and machine-readable reports.

mod checks;
mod tables;

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::algebra::{c64, C64};
use crate::bethe::{bethe_residuals, BetheConfig};
use crate::qcalc::QParam;

pub use tables::{
    bt_record, bt_sweep, sweep_values, trajectory_csv, BtOutcome, BtRecord, BtResiduals, BtSweepReport, BT_SCHEMA, TRAJECTORY_SCHEMA,
};

pub const REPORT_SCHEMA: &str = "al-baxter/report/v1";
pub const BETHE_ROOTS_SCHEMA: &str = "al-baxter/bethe-roots/v1";
pub const THREADS_ENV: &str = "AL_BAXTER_THREADS";

/// Largest chain the suites accept.
pub const MAX_SITES: usize = 8;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot parse configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot read configuration: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(ConfigError::Invalid(format!("unknown format '{other}' (json or csv)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Newton stopping tolerance of the BT solver.
    pub newton: f64,
    /// Overrides every upper-bound check tolerance when set.
    pub residual: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { newton: 1e-12, residual: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleCounts {
    /// Random chain states per BT and classical check.
    pub states: usize,
    /// Spectral-parameter samples.
    pub spectral: usize,
    /// Points in function space.
    pub points: usize,
    /// Random `(λ, ν, η)` triples for the Yang–Baxter check.
    pub ybe: usize,
    /// Random polynomial pairs for the q-calculus laws.
    pub polynomials: usize,
}

impl Default for SampleCounts {
    fn default() -> Self {
        Self { states: 2, spectral: 16, points: 8, ybe: 100, polynomials: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    /// Deformation parameter; defaults to 0.5 when neither `alpha` nor `eta` is set.
    pub alpha: Option<f64>,
    /// Alternative to `alpha`: `α = 1/(1 + η)`.
    pub eta: Option<f64>,
    pub mu: f64,
    pub n_max: usize,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub sample_counts: SampleCounts,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 2,
            m: 1,
            alpha: None,
            eta: None,
            mu: 1.3,
            n_max: 5,
            tolerances: Tolerances::default(),
            seed: 7,
            sample_counts: SampleCounts::default(),
            output_path: None,
            format: OutputFormat::Json,
        }
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn qparam(&self) -> Result<QParam, ConfigError> {
        let q = match (self.alpha, self.eta) {
            (Some(_), Some(_)) => return Err(invalid("set alpha or eta, not both")),
            (Some(a), None) => QParam::real(a),
            (None, Some(e)) => QParam::from_eta(c64(e, 0.0)),
            (None, None) => QParam::real(0.5),
        }
        .map_err(|e| invalid(e.to_string()))?;
        let a = q.alpha();
        if !(a.re > 0.0 && a.re < 1.0) || a.im != 0.0 {
            return Err(invalid(format!("alpha must lie in (0, 1), got {a}")));
        }
        Ok(q)
    }

    pub fn mu_c(&self) -> C64 {
        c64(self.mu, 0.0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 || self.n > MAX_SITES {
            return Err(invalid(format!("N must be in 1..={MAX_SITES}, got {}", self.n)));
        }
        if self.m > self.n {
            return Err(invalid(format!("m must not exceed N (m = {}, N = {})", self.m, self.n)));
        }
        self.qparam()?;
        if !self.mu.is_finite() || self.mu == 0.0 {
            return Err(invalid(format!("mu must be finite and nonzero, got {}", self.mu)));
        }
        if self.n_max < self.m + 2 {
            return Err(invalid(format!("n_max must be at least m + 2 = {}, got {}", self.m + 2, self.n_max)));
        }
        let t = &self.tolerances;
        if !(t.newton > 0.0) || t.residual.is_some_and(|r| !(r > 0.0)) {
            return Err(invalid("tolerances must be positive"));
        }
        let s = &self.sample_counts;
        if [s.states, s.spectral, s.points, s.ybe, s.polynomials].contains(&0) {
            return Err(invalid("sample counts must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Classical,
    Bt,
    Quantum,
    Bethe,
    Baxter,
    All,
}

impl Suite {
    pub const MEMBERS: [Suite; 5] = [Suite::Classical, Suite::Bt, Suite::Quantum, Suite::Bethe, Suite::Baxter];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Classical => "classical",
            Suite::Bt => "bt",
            Suite::Quantum => "quantum",
            Suite::Bethe => "bethe",
            Suite::Baxter => "baxter",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::MEMBERS
            .into_iter()
            .chain([Suite::All])
            .find(|m| m.name() == s)
            .ok_or_else(|| invalid(format!("unknown suite '{s}'")))
    }
}

/// Direction of a check: most residuals must stay below the tolerance;
/// negative controls must exceed it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Upper,
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub params: Value,
    /// `None` when the check could not be evaluated.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckRecord {
    fn new(check_id: &str, params: Value, outcome: Result<f64, String>, tolerance: f64, bound: Bound) -> Self {
        let (residual, error) = match outcome {
            Ok(r) if r.is_finite() => (Some(r), None),
            Ok(r) => (None, Some(format!("non-finite residual {r}"))),
            Err(e) => (None, Some(e)),
        };
        let pass = match (residual, bound) {
            (Some(r), Bound::Upper) => r < tolerance,
            (Some(r), Bound::Lower) => r > tolerance,
            (None, _) => false,
        };
        Self { check_id: check_id.to_string(), params, residual, tolerance, bound, pass, error }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub all_pass: bool,
}

/// Bethe roots of a solved configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetheRoots {
    #[serde(rename = "N")]
    pub n_sites: usize,
    pub m: usize,
    pub alpha: C64,
    pub roots: Vec<C64>,
    pub residuals: Vec<f64>,
}

impl BetheRoots {
    pub fn from_config(cfg: &BetheConfig) -> Self {
        Self { n_sites: cfg.n_sites, m: cfg.m(), alpha: cfg.q.alpha(), roots: cfg.roots.clone(), residuals: bethe_residuals(cfg) }
    }

    /// Table with columns `k, re, im, residual`, preceded by a schema comment.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema: {BETHE_ROOTS_SCHEMA}\nk,re,im,residual\n");
        for (k, (l, r)) in self.roots.iter().zip(&self.residuals).enumerate() {
            out.push_str(&format!("{k},{:e},{:e},{:e}\n", l.re, l.im, r));
        }
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bethe: Vec<BetheRoots>,
}

/// Wall-clock data, kept apart from the deterministic content.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    /// Seconds per record, aligned with `records`.
    pub per_check: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: String,
    pub suite: Suite,
    pub config: RunConfig,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
    pub artifacts: Artifacts,
    pub timing: Timing,
}

impl Report {
    fn assemble(suite: Suite, config: &RunConfig, parts: Vec<SuiteOutput>, total_seconds: f64) -> Self {
        let mut records = Vec::new();
        let mut per_check = Vec::new();
        let mut artifacts = Artifacts::default();
        for part in parts {
            records.extend(part.records);
            per_check.extend(part.times);
            artifacts.bethe.extend(part.artifacts.bethe);
        }
        let passed = records.iter().filter(|r| r.pass).count();
        let summary = Summary { total: records.len(), passed, failed: records.len() - passed, all_pass: passed == records.len() };
        Self {
            schema: REPORT_SCHEMA.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            suite,
            config: config.clone(),
            records,
            summary,
            artifacts,
            timing: Timing { total_seconds, per_check },
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.all_pass
    }

    /// Pretty JSON without the timing field; identical for identical (config, seed, version).
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(map) = &mut v {
            map.remove("timing");
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    /// Pretty JSON including timing.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per check, preceded by a schema comment.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema: {REPORT_SCHEMA}\ncheck_id,residual,tolerance,bound,pass\n");
        for r in &self.records {
            let residual = r.residual.map(|x| format!("{x:e}")).unwrap_or_default();
            let bound = match r.bound {
                Bound::Upper => "upper",
                Bound::Lower => "lower",
            };
            out.push_str(&format!("{},{},{:e},{},{}\n", r.check_id, residual, r.tolerance, bound, r.pass));
        }
        out
    }
}

/// Records of one suite, in a fixed order.
#[derive(Default)]
pub(crate) struct SuiteOutput {
    pub records: Vec<CheckRecord>,
    pub times: Vec<f64>,
    pub artifacts: Artifacts,
}

impl SuiteOutput {
    /// Upper-bound check; `tolerance` yields to the configured override.
    pub fn check(&mut self, cfg: &RunConfig, id: &str, params: Value, tolerance: f64, f: impl FnOnce() -> Result<f64, String>) {
        let tol = cfg.tolerances.residual.unwrap_or(tolerance);
        self.timed(id, params, tol, Bound::Upper, f);
    }

    /// Negative control: the residual must exceed `threshold`.
    pub fn control(&mut self, id: &str, params: Value, threshold: f64, f: impl FnOnce() -> Result<f64, String>) {
        self.timed(id, params, threshold, Bound::Lower, f);
    }

    fn timed(&mut self, id: &str, params: Value, tol: f64, bound: Bound, f: impl FnOnce() -> Result<f64, String>) {
        let start = Instant::now();
        let outcome = f();
        self.times.push(start.elapsed().as_secs_f64());
        self.records.push(CheckRecord::new(id, params, outcome, tol, bound));
    }

    pub fn extend(&mut self, other: SuiteOutput) {
        self.records.extend(other.records);
        self.times.extend(other.times);
        self.artifacts.bethe.extend(other.artifacts.bethe);
    }
}

/// Thread cap from the environment; `None` leaves the rayon default.
pub fn thread_cap() -> Result<Option<usize>, ConfigError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(invalid(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
    }
}

/// Run a closure on a pool honouring the thread cap.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, ConfigError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| invalid(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn run_member(suite: Suite, cfg: &RunConfig) -> SuiteOutput {
    match suite {
        Suite::Classical => checks::classical(cfg),
        Suite::Bt => checks::backlund(cfg),
        Suite::Quantum => checks::quantum(cfg),
        Suite::Bethe => checks::bethe(cfg),
        Suite::Baxter => checks::baxter(cfg),
        Suite::All => unreachable!("expanded by caller"),
    }
}

/// Run a suite; member suites of `all` run concurrently and are reported in fixed order.
pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Result<Report, ConfigError> {
    cfg.validate()?;
    let start = Instant::now();
    let members: Vec<Suite> = if suite == Suite::All { Suite::MEMBERS.to_vec() } else { vec![suite] };
    let parts = with_pool(|| members.par_iter().map(|s| run_member(*s, cfg)).collect::<Vec<_>>())?;
    Ok(Report::assemble(suite, cfg, parts, start.elapsed().as_secs_f64()))
}

/// Parameters attached to a record.
pub(crate) fn params(pairs: &[(&str, Value)]) -> Value {
    Value::Object(pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect::<serde_json::Map<_, _>>())
}
