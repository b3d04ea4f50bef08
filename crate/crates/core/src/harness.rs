//! Seeded Monte Carlo experiments.
//!
//! An [`ExperimentConfig`] is a flat TOML table:
//!
//! ```toml
//! # instance: either explicit means ...
//! means = [0.9, 0.6, 0.5]
//! # ... or a two-group instance
//! arms = 32
//! w_star = 0.4
//! w_prime = 0.2
//!
//! algorithm = "pss"          # pss | sh | up
//! u = 2.0                    # pss only, default 2
//! adversary = "sh-schedule"  # noop | coupling | sh-schedule | schedule-aware | one-to-zero | zero-to-one
//! lambda = 0.5
//! horizon = 2000
//! cps_rule = "theorem-4.3"   # or: budget = 2.5
//! trials = 1000
//! master_seed = 1
//!
//! # optional sweep axes
//! sweep_algorithm = ["pss", "sh", "up"]
//! sweep_arms = [8, 16, 32]
//! sweep_horizon = [1000, 2000]
//! sweep_lambda = [0.5, 0.9]
//! sweep_w_star = [0.4, 0.5]
//! sweep_w_prime = [0.2, 0.3]
//! ```
//!
//! Trial `i` of a cell runs on the seeds derived from `(master_seed, i)`.
//! A sweep expands into the Cartesian product of its axes, each axis sorted
//! ascending and the axes nested in the order listed above; cell `k` gets the
//! master seed `cell_seed(master_seed, k)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversaries::AdversarySpec;
use crate::agents::{AgentKind, AgentSpec};
use crate::cps::CpsRule;
use crate::engine::run_trial;
use crate::error::{Error, Result};
use crate::instance::BanditInstance;
use crate::seed::{self, TrialSeeds};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_prime: Option<f64>,

    pub algorithm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default = "default_adversary")]
    pub adversary: String,
    #[serde(default)]
    pub lambda: f64,
    pub horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cps_rule: Option<String>,
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_algorithm: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_arms: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_horizon: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_w_star: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_w_prime: Option<Vec<f64>>,
}

fn default_adversary() -> String {
    "noop".into()
}

impl ExperimentConfig {
    /// A single-cell config on a two-group instance.
    pub fn two_group(arms: usize, w_star: f64, w_prime: f64, algorithm: &str, horizon: usize, trials: usize) -> Self {
        Self {
            means: None,
            arms: Some(arms),
            w_star: Some(w_star),
            w_prime: Some(w_prime),
            algorithm: algorithm.into(),
            u: None,
            adversary: default_adversary(),
            lambda: 0.0,
            horizon,
            budget: Some(0.0),
            cps_rule: None,
            trials,
            master_seed: 0,
            sweep_algorithm: None,
            sweep_arms: None,
            sweep_horizon: None,
            sweep_lambda: None,
            sweep_w_star: None,
            sweep_w_prime: None,
        }
    }

    /// A single-cell config on explicit means.
    pub fn with_means(means: Vec<f64>, algorithm: &str, horizon: usize, trials: usize) -> Self {
        Self {
            means: Some(means),
            arms: None,
            w_star: None,
            w_prime: None,
            ..Self::two_group(0, 0.0, 0.0, algorithm, horizon, trials)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::config(config_key_of(&e), e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Experiment {
            context: path.display().to_string(),
            source: Box::new(e),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    pub fn is_sweep(&self) -> bool {
        self.sweep_algorithm.is_some()
            || self.sweep_arms.is_some()
            || self.sweep_horizon.is_some()
            || self.sweep_lambda.is_some()
            || self.sweep_w_star.is_some()
            || self.sweep_w_prime.is_some()
    }

    /// Checks the config's shape; building a cell's instance, agent and
    /// adversary is checked when the cell runs.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        match (&self.budget, &self.cps_rule) {
            (Some(_), Some(_)) => return Err(Error::config("budget", "give either `budget` or `cps_rule`, not both")),
            (None, None) => return Err(Error::config("budget", "one of `budget` or `cps_rule` is required")),
            (Some(c), None) if c.is_nan() || *c < 0.0 => return Err(Error::config("budget", format!("must be nonnegative, got {c}"))),
            (None, Some(rule)) => {
                rule.parse::<CpsRule>()?;
            }
            _ => {}
        }
        let two_group = [self.arms.is_some(), self.w_star.is_some(), self.w_prime.is_some()];
        match (&self.means, two_group) {
            (Some(_), [false, false, false]) => {
                for (key, set) in [
                    ("sweep_arms", self.sweep_arms.is_some()),
                    ("sweep_w_star", self.sweep_w_star.is_some()),
                    ("sweep_w_prime", self.sweep_w_prime.is_some()),
                ] {
                    if set {
                        return Err(Error::config(key, "sweeps over instance parameters need a two-group instance"));
                    }
                }
            }
            (Some(_), _) => return Err(Error::config("means", "give either `means` or `arms`/`w_star`/`w_prime`")),
            (None, [true, true, true]) => {}
            (None, _) => {
                let missing = ["arms", "w_star", "w_prime"]
                    .into_iter()
                    .zip(two_group)
                    .find(|(_, set)| !set)
                    .map(|(k, _)| k)
                    .unwrap_or("means");
                return Err(Error::config(missing, "instance needs `means` or all of `arms`, `w_star`, `w_prime`"));
            }
        }
        self.algorithm.parse::<AgentKind>()?;
        self.adversary.parse::<AdversarySpec>()?;
        if let Some(u) = self.u {
            if u.is_nan() || u <= 1.0 {
                return Err(Error::config("u", format!("must exceed 1, got {u}")));
            }
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return Err(Error::config("lambda", format!("must be nonnegative, got {}", self.lambda)));
        }
        if let Some(names) = &self.sweep_algorithm {
            for name in names {
                name.parse::<AgentKind>().map_err(|_| Error::config("sweep_algorithm", format!("unknown algorithm `{name}`")))?;
            }
        }
        for (key, len) in [
            ("sweep_algorithm", self.sweep_algorithm.as_ref().map(Vec::len)),
            ("sweep_arms", self.sweep_arms.as_ref().map(Vec::len)),
            ("sweep_horizon", self.sweep_horizon.as_ref().map(Vec::len)),
            ("sweep_lambda", self.sweep_lambda.as_ref().map(Vec::len)),
            ("sweep_w_star", self.sweep_w_star.as_ref().map(Vec::len)),
            ("sweep_w_prime", self.sweep_w_prime.as_ref().map(Vec::len)),
        ] {
            if len == Some(0) {
                return Err(Error::config(key, "sweep axes must not be empty"));
            }
        }
        Ok(())
    }

    pub fn instance(&self) -> Result<BanditInstance> {
        match &self.means {
            Some(means) => BanditInstance::new(means.clone()),
            None => BanditInstance::two_group(
                self.arms.unwrap_or_default(),
                self.w_star.unwrap_or_default(),
                self.w_prime.unwrap_or_default(),
            ),
        }
    }

    pub fn agent(&self) -> Result<AgentSpec> {
        Ok(AgentSpec::from_kind(self.algorithm.parse()?, self.u.unwrap_or(2.0)))
    }

    pub fn adversary_spec(&self) -> Result<AdversarySpec> {
        self.adversary.parse()
    }

    /// Corruption budget of a single cell.
    pub fn resolved_budget(&self, instance: &BanditInstance) -> Result<f64> {
        match (&self.budget, &self.cps_rule) {
            (Some(c), _) => Ok(*c),
            (None, Some(rule)) => Ok(rule.parse::<CpsRule>()?.budget(instance, self.horizon, self.lambda)),
            (None, None) => Err(Error::config("budget", "one of `budget` or `cps_rule` is required")),
        }
    }

    /// Expands the sweep axes into single-cell configs, in output order.
    /// A config without axes is its own only cell.
    pub fn cells(&self) -> Vec<ExperimentConfig> {
        if !self.is_sweep() {
            return vec![self.clone()];
        }
        let mut base = self.clone();
        base.sweep_algorithm = None;
        base.sweep_arms = None;
        base.sweep_horizon = None;
        base.sweep_lambda = None;
        base.sweep_w_star = None;
        base.sweep_w_prime = None;

        fn sorted<T: Clone>(axis: &Option<Vec<T>>, current: T, cmp: impl Fn(&T, &T) -> std::cmp::Ordering) -> Vec<T> {
            let mut values = axis.clone().unwrap_or_else(|| vec![current]);
            values.sort_by(cmp);
            values
        }
        let f = |a: &f64, b: &f64| a.total_cmp(b);
        let algorithms = sorted(&self.sweep_algorithm, self.algorithm.clone(), |a, b| a.cmp(b));
        let arms = sorted(&self.sweep_arms, self.arms.unwrap_or_default(), |a, b| a.cmp(b));
        let horizons = sorted(&self.sweep_horizon, self.horizon, |a, b| a.cmp(b));
        let lambdas = sorted(&self.sweep_lambda, self.lambda, f);
        let w_stars = sorted(&self.sweep_w_star, self.w_star.unwrap_or_default(), f);
        let w_primes = sorted(&self.sweep_w_prime, self.w_prime.unwrap_or_default(), f);

        let mut cells = Vec::new();
        for algorithm in &algorithms {
            for &l in &arms {
                for &horizon in &horizons {
                    for &lambda in &lambdas {
                        for &w_star in &w_stars {
                            for &w_prime in &w_primes {
                                let mut cell = base.clone();
                                cell.algorithm = algorithm.clone();
                                if cell.means.is_none() {
                                    cell.arms = Some(l);
                                    cell.w_star = Some(w_star);
                                    cell.w_prime = Some(w_prime);
                                }
                                cell.horizon = horizon;
                                cell.lambda = lambda;
                                cell.master_seed = seed::cell_seed(self.master_seed, cells.len() as u64);
                                cells.push(cell);
                            }
                        }
                    }
                }
            }
        }
        cells
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn describe(&self) -> String {
        format!(
            "algorithm {}, adversary {}, T = {}, λ = {}, instance {}",
            self.algorithm,
            self.adversary,
            self.horizon,
            self.lambda,
            match &self.means {
                Some(m) => format!("{m:?}"),
                None => format!(
                    "two-group(L = {}, w* = {}, w' = {})",
                    self.arms.unwrap_or_default(),
                    self.w_star.unwrap_or_default(),
                    self.w_prime.unwrap_or_default()
                ),
            }
        )
    }
}

fn config_key_of(e: &toml::de::Error) -> String {
    // serde messages name the offending field between backticks
    let message = e.message();
    message
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "config".to_string())
}

/// Aggregated outcome of one experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub algorithm: String,
    pub adversary: String,
    #[serde(rename = "L")]
    pub arms: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub u: Option<f64>,
    pub lambda: f64,
    #[serde(rename = "C")]
    pub budget: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_gap: f64,
    pub mean_budget_spent: f64,
    pub master_seed: u64,
    pub config_hash: String,
}

pub const SUMMARY_COLUMNS: [&str; 16] = [
    "algorithm",
    "adversary",
    "L",
    "T",
    "u",
    "lambda",
    "C",
    "trials",
    "successes",
    "success_rate",
    "ci_low",
    "ci_high",
    "mean_gap",
    "mean_budget_spent",
    "master_seed",
    "config_hash",
];

/// One line of the per-trial CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: usize,
    /// Trial seed; the role seeds derive from it.
    pub seed: u64,
    pub output_arm: usize,
    pub best_arm: usize,
    pub success: bool,
    pub gap: f64,
    pub budget_spent: f64,
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

/// Runs a single-cell config on the current rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    run_experiment_detailed(config).map(|(summary, _)| summary)
}

/// As [`run_experiment`], also returning every trial.
pub fn run_experiment_detailed(config: &ExperimentConfig) -> Result<(ExperimentSummary, Vec<TrialRecord>)> {
    let attach = |e: Error| Error::Experiment {
        context: config.describe(),
        source: Box::new(e),
    };
    config.validate().map_err(attach)?;
    if config.is_sweep() {
        return Err(attach(Error::config("sweep", "run_experiment takes a single cell; use run_sweep")));
    }
    let instance = config.instance().map_err(attach)?;
    let agent = config.agent().map_err(attach)?;
    agent.validate(instance.num_arms(), config.horizon).map_err(attach)?;
    let adversary = config.adversary_spec().map_err(attach)?;
    let budget = config.resolved_budget(&instance).map_err(attach)?;

    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let trial_seed = seed::trial_seed(config.master_seed, i as u64);
            let result = run_trial(
                &instance,
                &agent,
                &adversary,
                config.horizon,
                budget,
                TrialSeeds::from_trial_seed(trial_seed),
            )?;
            Ok(TrialRecord {
                trial_id: i,
                seed: trial_seed,
                output_arm: result.output.0,
                best_arm: result.best_arm.0,
                success: result.success,
                gap: result.gap_of_output,
                budget_spent: result.budget_spent,
            })
        })
        .collect::<Result<_>>()
        .map_err(attach)?;

    let successes = records.iter().filter(|r| r.success).count();
    let n = records.len() as f64;
    let (ci_low, ci_high) = wilson_interval(successes, records.len(), Z_95);
    let summary = ExperimentSummary {
        algorithm: config.algorithm.clone(),
        adversary: config.adversary.clone(),
        arms: instance.num_arms(),
        horizon: config.horizon,
        u: agent.u(),
        lambda: config.lambda,
        budget,
        trials: records.len(),
        successes,
        success_rate: successes as f64 / n,
        ci_low,
        ci_high,
        mean_gap: records.iter().map(|r| r.gap).sum::<f64>() / n,
        mean_budget_spent: records.iter().map(|r| r.budget_spent).sum::<f64>() / n,
        master_seed: config.master_seed,
        config_hash: config.config_hash(),
    };
    Ok((summary, records))
}

/// Runs every cell of a config, in cell order.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<ExperimentSummary>> {
    config.validate()?;
    config.cells().iter().map(run_experiment).collect()
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config("threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn csv_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_rows<T: Serialize>(rows: &[T], header: &[&str], path: &Path) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    writer.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        writer.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Writes summaries with the fixed column schema; an empty slice gives a
/// header-only file.
pub fn write_csv(summaries: &[ExperimentSummary], path: &Path) -> Result<()> {
    write_rows(summaries, &SUMMARY_COLUMNS, path)
}

pub fn write_trials_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    write_rows(
        records,
        &["trial_id", "seed", "output_arm", "best_arm", "success", "gap", "budget_spent"],
        path,
    )
}

/// Reads a summary CSV, naming any missing column.
pub fn read_csv(path: &Path) -> Result<Vec<ExperimentSummary>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let missing: Vec<&str> = SUMMARY_COLUMNS
        .iter()
        .copied()
        .filter(|c| !headers.iter().any(|h| h == *c))
        .collect();
    if !missing.is_empty() {
        return Err(csv_error(path, format!("missing column(s): {}", missing.join(", "))));
    }
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| csv_error(path, format!("row {}: {e}", i + 1))))
        .collect()
}

/// Groups summaries by series label (algorithm plus `u` when present),
/// keeping the input order inside each series.
pub fn series(summaries: &[ExperimentSummary]) -> BTreeMap<String, Vec<&ExperimentSummary>> {
    let mut out: BTreeMap<String, Vec<&ExperimentSummary>> = BTreeMap::new();
    for s in summaries {
        out.entry(series_label(s)).or_default().push(s);
    }
    out
}

pub fn series_label(s: &ExperimentSummary) -> String {
    match s.u {
        Some(u) => format!("{}({u})", s.algorithm),
        None => s.algorithm.clone(),
    }
}
