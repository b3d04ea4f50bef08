//! `bailab`: run corrupted best-arm identification experiments.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 when the run itself fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bailab::analysis::{comparison_table, cps_regime, pss_guarantee};
use bailab::harness::{self, run_experiment_detailed, with_threads, write_csv, write_trials_csv, ExperimentSummary};
use bailab::plot::{plot_csv, render_svg};
use bailab::presets::{self, PresetOptions};
use bailab::{BanditInstance, Error, ExperimentConfig};

#[derive(Parser)]
#[command(name = "bailab", version, about = "Best-arm identification under adversarial corruption")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment (every cell, if the config has sweep axes).
    Run(RunArgs),
    /// Run a sweep and plot it.
    Sweep(RunArgs),
    /// Print hardness measures, guarantees and the comparison table.
    Analyze(AnalyzeArgs),
    /// Re-run a built-in experiment: table-a1, fig-4 or fig-a1.
    Reproduce(ReproduceArgs),
    /// Draw a results CSV as an SVG chart.
    Plot(PlotArgs),
}

#[derive(Args, Default)]
struct InstanceArgs {
    /// Comma-separated arm means.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    means: Option<Vec<f64>>,
    /// Number of arms of a two-group instance.
    #[arg(long = "L")]
    arms: Option<usize>,
    #[arg(long)]
    w_star: Option<f64>,
    #[arg(long)]
    w_prime: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    adversary: Option<String>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "T")]
    horizon: Option<usize>,
    /// Corruption budget.
    #[arg(long = "C")]
    budget: Option<f64>,
    #[arg(long)]
    cps_rule: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Also write one CSV line per trial.
    #[arg(long)]
    per_trial: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 2.0)]
    u: f64,
    #[arg(long = "T")]
    horizon: usize,
    #[arg(long = "C", default_value_t = 0.0)]
    budget: f64,
    /// Also write the comparison table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    name: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 2021)]
    seed: u64,
    #[arg(long, default_value = "sh-schedule")]
    adversary: String,
    #[arg(long, default_value = "theorem-4.3")]
    cps_rule: String,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct PlotArgs {
    csv: PathBuf,
    svg: PathBuf,
    #[arg(long, default_value = "success rate")]
    title: String,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args, false),
        Command::Sweep(args) => cmd_run(args, true),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Reproduce(args) => cmd_reproduce(args),
        Command::Plot(args) => plot_csv(&args.csv, &args.svg, &args.title).map_err(Failure::from),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => {
            let horizon = args
                .horizon
                .ok_or_else(|| Failure::Usage("--T is required without --config".into()))?;
            let mut config = ExperimentConfig::two_group(0, 0.0, 0.0, "pss", horizon, 1000);
            config.arms = None;
            config.w_star = None;
            config.w_prime = None;
            config
        }
    };
    let inst = &args.instance;
    if let Some(means) = &inst.means {
        config.means = Some(means.clone());
        config.arms = None;
        config.w_star = None;
        config.w_prime = None;
    }
    if inst.arms.is_some() || inst.w_star.is_some() || inst.w_prime.is_some() {
        config.means = None;
        config.arms = inst.arms.or(config.arms);
        config.w_star = inst.w_star.or(config.w_star);
        config.w_prime = inst.w_prime.or(config.w_prime);
    }
    if let Some(a) = &args.algorithm {
        config.algorithm = a.clone();
        config.sweep_algorithm = None;
    }
    if let Some(a) = &args.adversary {
        config.adversary = a.clone();
    }
    if args.u.is_some() {
        config.u = args.u;
    }
    if let Some(l) = args.lambda {
        config.lambda = l;
    }
    if let Some(t) = args.horizon {
        config.horizon = t;
    }
    if let Some(c) = args.budget {
        config.budget = Some(c);
        config.cps_rule = None;
    }
    if let Some(rule) = &args.cps_rule {
        config.cps_rule = Some(rule.clone());
        config.budget = None;
    }
    if let Some(n) = args.trials {
        config.trials = n;
    }
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    config.validate()?;
    Ok(config)
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(Error::Io {
        path: dir.to_path_buf(),
        source: e,
    }))
}

fn print_summary(s: &ExperimentSummary) {
    println!(
        "{:<8} {:<15} L={:<4} T={:<6} λ={:<5} C={:<10.4} success {:>5}/{:<5} = {:.3} [{:.3}, {:.3}]",
        harness::series_label(s),
        s.adversary,
        s.arms,
        s.horizon,
        s.lambda,
        s.budget,
        s.successes,
        s.trials,
        s.success_rate,
        s.ci_low,
        s.ci_high
    );
}

/// Runs every cell of `config`, printing each summary, and writes the CSVs.
fn execute(
    config: &ExperimentConfig,
    out: &Path,
    stem: &str,
    threads: Option<usize>,
    per_trial: bool,
) -> Result<Vec<ExperimentSummary>, Failure> {
    let cells = config.cells();
    let mut summaries = Vec::with_capacity(cells.len());
    let mut trials = Vec::new();
    for cell in &cells {
        let (summary, records) = with_threads(threads, || run_experiment_detailed(cell))??;
        print_summary(&summary);
        summaries.push(summary);
        if per_trial && cells.len() == 1 {
            trials = records;
        }
    }
    write_csv(&summaries, &out.join(format!("{stem}.csv")))?;
    if per_trial {
        if cells.len() != 1 {
            return Err(Failure::Usage("--per-trial needs a single-cell config".into()));
        }
        write_trials_csv(&trials, &out.join(format!("{stem}-trials.csv")))?;
    }
    Ok(summaries)
}

fn cmd_run(args: RunArgs, plot: bool) -> Result<(), Failure> {
    let config = build_config(&args)?;
    if plot && !config.is_sweep() {
        return Err(Failure::Usage("sweep needs at least one sweep_* axis".into()));
    }
    create_dir(&args.out)?;
    let stem = if plot { "sweep" } else { "results" };
    let summaries = execute(&config, &args.out, stem, args.threads, args.per_trial)?;
    if plot {
        let svg = args.out.join("sweep.svg");
        std::fs::write(&svg, render_svg(&summaries, "success rate")).map_err(|e| Failure::Runtime(Error::Io {
            path: svg.clone(),
            source: e,
        }))?;
    }
    println!("wrote {}", args.out.join(format!("{stem}.csv")).display());
    Ok(())
}

fn instance_from(args: &InstanceArgs) -> Result<BanditInstance, Failure> {
    match (&args.means, args.arms, args.w_star, args.w_prime) {
        (Some(means), None, None, None) => Ok(BanditInstance::new(means.clone())?),
        (None, Some(l), Some(ws), Some(wp)) => Ok(BanditInstance::two_group(l, ws, wp)?),
        _ => Err(Failure::Usage("give either --means or all of --L, --w-star, --w-prime".into())),
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let instance = instance_from(&args.instance)?;
    let g = pss_guarantee(&instance, args.horizon, args.u, args.budget)?;
    let regime = cps_regime(&instance, args.u, args.budget, args.horizon)?;
    println!("H2              {:.4}", g.h2);
    println!("H2~ (u = {})    {:.4}", args.u, g.h2_tilde);
    println!("epsilon_C       {:.6}", g.epsilon_c);
    println!("delta bound     {:.6}", g.delta_bound);
    println!(
        "CPS             {:.6} ({}; thresholds {:.6} / {:.6}, extreme {:.6})",
        regime.cps,
        regime.classification.name(),
        regime.low_threshold,
        regime.vacuous_threshold,
        regime.extreme_threshold
    );
    println!();
    let rows = comparison_table(&instance, args.horizon, args.budget, args.u)?;
    println!("{:<10} {:>14} {:>14}", "algorithm", "epsilon_C", "delta");
    for r in &rows {
        println!("{:<10} {:>14.6} {:>14.6e}", r.algorithm, r.epsilon_c, r.delta);
    }
    if let Some(path) = &args.csv {
        let mut text = String::from("algorithm,epsilon_c,delta\n");
        for r in &rows {
            text.push_str(&format!("{},{},{}\n", r.algorithm, r.epsilon_c, r.delta));
        }
        std::fs::write(path, text).map_err(|e| Failure::Runtime(Error::Io {
            path: path.clone(),
            source: e,
        }))?;
    }
    Ok(())
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<(), Failure> {
    let opts = PresetOptions {
        trials: args.trials,
        master_seed: args.seed,
        adversary: args.adversary.clone(),
        cps_rule: args.cps_rule.clone(),
    };
    let configs = presets::by_name(&args.name, &opts).ok_or_else(|| {
        Failure::Usage(format!("unknown experiment `{}` (expected table-a1, fig-4 or fig-a1)", args.name))
    })?;
    create_dir(&args.out)?;
    let mut all = Vec::new();
    for (stem, config) in configs {
        config.validate()?;
        let toml_path = args.out.join(format!("{stem}.toml"));
        std::fs::write(&toml_path, config.to_toml()).map_err(|e| Failure::Runtime(Error::Io {
            path: toml_path.clone(),
            source: e,
        }))?;
        println!("# {stem}");
        let summaries = execute(&config, &args.out, &stem, args.threads, false)?;
        let svg = args.out.join(format!("{stem}.svg"));
        std::fs::write(&svg, render_svg(&summaries, &stem)).map_err(|e| Failure::Runtime(Error::Io {
            path: svg.clone(),
            source: e,
        }))?;
        for (cell, s) in config.cells().iter().zip(&summaries) {
            all.push((cell.clone(), s.clone()));
        }
    }

    if args.name == "table-a1" {
        println!();
        println!("{:<5} {:<5} {:<5} | {:>15} {:>15} {:>15}", "λ", "w*", "w'", "PSS(2) ref/got", "SH ref/got", "UP ref/got");
        for row in presets::TABLE_A1 {
            let measured: Vec<String> = presets::ALGORITHMS
                .iter()
                .zip(row.reference)
                .map(|(alg, reference)| {
                    let got = all
                        .iter()
                        .find(|(c, _)| {
                            c.algorithm == *alg
                                && c.lambda == row.lambda
                                && c.w_star == Some(row.w_star)
                                && c.w_prime == Some(row.w_prime)
                        })
                        .map(|(_, s)| format!("{:.0}", 100.0 * s.success_rate))
                        .unwrap_or_else(|| "-".into());
                    format!("{reference:>6.0} / {got:>5}")
                })
                .collect();
            println!(
                "{:<5} {:<5} {:<5} | {:>15} {:>15} {:>15}",
                row.lambda, row.w_star, row.w_prime, measured[0], measured[1], measured[2]
            );
        }
    }
    Ok(())
}
