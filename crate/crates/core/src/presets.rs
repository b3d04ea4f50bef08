//! Built-in experiment configurations and their reference success rates.
//!
//! All presets use two-group instances and the `sh-schedule` adversary with
//! the `theorem-4.3` budget rule unless the caller overrides them.

use crate::harness::ExperimentConfig;

pub const ALGORITHMS: [&str; 3] = ["pss", "sh", "up"];

/// One row of the reference table: `(λ, w*, w')` and success percentages of
/// PSS(2), SH and UP at `L = 32`, `T = 2000`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub lambda: f64,
    pub w_star: f64,
    pub w_prime: f64,
    pub reference: [f64; 3],
}

pub const TABLE_A1: [TableRow; 6] = [
    TableRow { lambda: 0.5, w_star: 0.4, w_prime: 0.2, reference: [76.0, 42.0, 12.0] },
    TableRow { lambda: 0.5, w_star: 0.5, w_prime: 0.2, reference: [91.0, 64.0, 13.0] },
    TableRow { lambda: 0.5, w_star: 0.5, w_prime: 0.3, reference: [74.0, 51.0, 19.0] },
    TableRow { lambda: 0.9, w_star: 0.4, w_prime: 0.2, reference: [72.0, 45.0, 9.0] },
    TableRow { lambda: 0.9, w_star: 0.5, w_prime: 0.2, reference: [83.0, 64.0, 7.0] },
    TableRow { lambda: 0.9, w_star: 0.5, w_prime: 0.3, reference: [60.0, 40.0, 12.0] },
];

/// Horizons of the long-horizon sweeps.
pub const FIG_A1_HORIZONS: [usize; 4] = [2_000, 5_000, 10_000, 20_000];

/// `(L, λ)` panels of the long-horizon sweeps.
pub const FIG_A1_PANELS: [(usize, f64); 3] = [(32, 9.0), (64, 19.0), (128, 39.0)];

/// Knobs shared by every preset.
#[derive(Debug, Clone)]
pub struct PresetOptions {
    pub trials: usize,
    pub master_seed: u64,
    pub adversary: String,
    pub cps_rule: String,
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self {
            trials: 1000,
            master_seed: 2021,
            adversary: "sh-schedule".into(),
            cps_rule: "theorem-4.3".into(),
        }
    }
}

fn base(opts: &PresetOptions, arms: usize, w_star: f64, w_prime: f64, lambda: f64, horizon: usize) -> ExperimentConfig {
    let mut config = ExperimentConfig::two_group(arms, w_star, w_prime, ALGORITHMS[0], horizon, opts.trials);
    config.adversary = opts.adversary.clone();
    config.budget = None;
    config.cps_rule = Some(opts.cps_rule.clone());
    config.lambda = lambda;
    config.master_seed = opts.master_seed;
    config.sweep_algorithm = Some(ALGORITHMS.iter().map(|s| s.to_string()).collect());
    config
}

/// One sweep per table row over the three algorithms.
pub fn table_a1(opts: &PresetOptions) -> Vec<(String, ExperimentConfig)> {
    TABLE_A1
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut config = base(opts, 32, row.w_star, row.w_prime, row.lambda, 2000);
            config.master_seed = opts.master_seed.wrapping_add(i as u64);
            (
                format!("table-a1-row{}-lambda{}-w{}-{}", i + 1, row.lambda, row.w_star, row.w_prime),
                config,
            )
        })
        .collect()
}

/// Sweeps over `T` for each `(L, λ)` panel with `w* = 0.4`, `w' = 0.2`.
pub fn fig_a1(opts: &PresetOptions) -> Vec<(String, ExperimentConfig)> {
    FIG_A1_PANELS
        .iter()
        .map(|&(arms, lambda)| {
            let mut config = base(opts, arms, 0.4, 0.2, lambda, FIG_A1_HORIZONS[0]);
            config.sweep_horizon = Some(FIG_A1_HORIZONS.to_vec());
            (format!("fig-a1-L{arms}-lambda{lambda}"), config)
        })
        .collect()
}

/// The four panels at `L = 32`, `T = 2000` unless swept:
/// (a) `λ = 0.5` over `w*, w'`; (b) the same at `λ = 0.9`;
/// (c) `L` from 8 to 128; (d) `T` from 1000 to 20000.
pub fn fig_4(opts: &PresetOptions) -> Vec<(String, ExperimentConfig)> {
    let mut panels = Vec::new();
    for (name, lambda) in [("a", 0.5), ("b", 0.9)] {
        let mut config = base(opts, 32, 0.4, 0.2, lambda, 2000);
        config.sweep_w_star = Some(vec![0.4, 0.5]);
        config.sweep_w_prime = Some(vec![0.2, 0.3]);
        panels.push((format!("fig-4{name}-lambda{lambda}"), config));
    }
    let mut config = base(opts, 32, 0.4, 0.2, 0.5, 2000);
    config.sweep_arms = Some(vec![8, 16, 32, 64, 128]);
    panels.push(("fig-4c-arms".into(), config));
    let mut config = base(opts, 32, 0.4, 0.2, 0.5, 2000);
    config.sweep_horizon = Some(vec![1_000, 2_000, 5_000, 10_000, 20_000]);
    panels.push(("fig-4d-horizon".into(), config));
    panels
}

/// Preset by name: `table-a1`, `fig-4` or `fig-a1`.
pub fn by_name(name: &str, opts: &PresetOptions) -> Option<Vec<(String, ExperimentConfig)>> {
    match name {
        "table-a1" => Some(table_a1(opts)),
        "fig-4" => Some(fig_4(opts)),
        "fig-a1" => Some(fig_a1(opts)),
        _ => None,
    }
}

/// Published percentage for `(algorithm, λ, w*, w')` at `L = 32`, `T = 2000`.
pub fn table_reference(algorithm: &str, lambda: f64, w_star: f64, w_prime: f64) -> Option<f64> {
    let column = ALGORITHMS.iter().position(|a| *a == algorithm)?;
    TABLE_A1
        .iter()
        .find(|r| r.lambda == lambda && r.w_star == w_star && r.w_prime == w_prime)
        .map(|r| r.reference[column])
}
