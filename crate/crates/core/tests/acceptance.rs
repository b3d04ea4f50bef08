//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Detail lines are indented above each
//! verdict. The closing INFO block is a diagnostic, not a criterion.

use std::process::ExitCode;

use bailab::adversaries::AdversarySpec;
use bailab::agents::AgentSpec;
use bailab::analysis::{h2, h2_tilde, lemma52_event_rate};
use bailab::cps::CpsRule;
use bailab::engine::run_trial_traced;
use bailab::harness::{run_experiment, run_sweep, with_threads, write_csv, ExperimentConfig, ExperimentSummary};
use bailab::presets::{self, PresetOptions, TABLE_A1};
use bailab::schedule::PhaseSchedule;
use bailab::seed::TrialSeeds;
use bailab::BanditInstance;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Half-width of the reference-table window, in percentage points.
const TABLE_TOLERANCE: f64 = 12.0;
const TRIALS: usize = 1000;
/// Coupling frequency sample size.
const LIVE_STEPS: usize = 100_000;
const STRATEGY_I_TRIALS: usize = 10_000;
const CHI_SQUARE_ALPHA: f64 = 0.01;
const LEMMA52_TRIALS: usize = 10_000;

struct Verdict {
    pass: bool,
    summary: String,
}

fn verdict(pass: bool, summary: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        summary: summary.into(),
    }
}

fn pct(s: &ExperimentSummary) -> f64 {
    100.0 * s.success_rate
}

fn table_a1() -> Verdict {
    let opts = PresetOptions {
        trials: TRIALS,
        ..PresetOptions::default()
    };
    let mut worst: f64 = 0.0;
    let mut misses = 0;
    for ((_, config), row) in presets::table_a1(&opts).into_iter().zip(TABLE_A1) {
        let summaries = run_sweep(&config).expect("table row runs");
        let mut cells = Vec::new();
        for (s, reference) in summaries.iter().zip(row.reference) {
            let diff = pct(s) - reference;
            worst = worst.max(diff.abs());
            misses += (diff.abs() > TABLE_TOLERANCE) as usize;
            cells.push(format!("{} {:.1} (ref {reference})", s.algorithm, pct(s)));
        }
        println!(
            "    λ={} w*={} w'={} C={:.4}: {}",
            row.lambda,
            row.w_star,
            row.w_prime,
            summaries[0].budget,
            cells.join(", ")
        );
    }
    verdict(
        misses == 0,
        format!("{misses}/18 cells outside ±{TABLE_TOLERANCE} points, worst deviation {worst:.1}"),
    )
}

fn fig_a1_trend() -> Verdict {
    let opts = PresetOptions {
        trials: TRIALS,
        ..PresetOptions::default()
    };
    let (_, config) = presets::fig_a1(&opts).into_iter().next().expect("L = 32 panel");
    let summaries = run_sweep(&config).expect("sweep runs");
    let curve = |alg: &str| -> Vec<f64> { summaries.iter().filter(|s| s.algorithm == alg).map(pct).collect() };
    let pss = curve("pss");
    let sh = curve("sh");
    println!("    T = {:?}", presets::FIG_A1_HORIZONS);
    println!("    pss {pss:.1?}");
    println!("    sh  {sh:.1?}");
    println!("    up  {:.1?}", curve("up"));
    // nondecreasing in trend: no drop beyond sampling noise, and net rise
    let noise = 100.0 * 3.0 * (0.25 / TRIALS as f64).sqrt();
    let trend = pss.windows(2).all(|w| w[1] >= w[0] - noise) && pss.last() >= pss.first();
    let pss_final = *pss.last().unwrap();
    let sh_max = sh.iter().copied().fold(0.0, f64::max);
    verdict(
        trend && pss_final >= 60.0 && sh_max <= 20.0,
        format!("PSS(2) trend {trend}, PSS(2) at T=20000 {pss_final:.1}% (need ≥60), SH max {sh_max:.1}% (need ≤20)"),
    )
}

fn no_corruption() -> Verdict {
    let mut rates = Vec::new();
    for alg in presets::ALGORITHMS {
        let mut config = ExperimentConfig::two_group(8, 0.9, 0.3, alg, 5000, TRIALS);
        config.master_seed = 11;
        let s = run_experiment(&config).expect("runs");
        rates.push((alg, pct(&s)));
    }
    let pass = rates.iter().all(|&(_, r)| r >= 99.0);
    verdict(pass, format!("success {rates:?} (need ≥99 each)"))
}

fn coupling_distribution() -> Verdict {
    let inst = BanditInstance::two_group(32, 0.4, 0.2).unwrap();
    let horizon = 2000;
    let budget = CpsRule::Theorem31.budget(&inst, horizon, 0.5);
    let best = inst.best_arm().index();
    let (mut live, mut ones) = (0usize, 0usize);
    let mut trial = 0;
    while live < LIVE_STEPS {
        let out = run_trial_traced(
            &inst,
            &AgentSpec::Pss { u: 2.0 },
            &AdversarySpec::Coupling,
            horizon,
            budget,
            TrialSeeds::derive(4, trial),
            true,
        )
        .expect("coupling trial runs");
        for r in &out.rounds {
            if budget - (r.spent - r.cost) >= 1.0 {
                live += 1;
                ones += (r.corrupted[best] == 1.0) as usize;
            }
        }
        trial += 1;
    }
    let p = inst.mean_at_rank(2) - inst.min_gap();
    let freq = ones as f64 / live as f64;
    let sigma = (p * (1.0 - p) / live as f64).sqrt();
    verdict(
        (freq - p).abs() <= 3.0 * sigma,
        format!("P[W̃(best)=1] = {freq:.5} over {live} live steps, target {p:.5} ± {:.5}", 3.0 * sigma),
    )
}

fn strategy_one_uniform() -> Verdict {
    let arms = 10;
    let critical = ChiSquared::new((arms - 1) as f64).unwrap().inverse_cdf(1.0 - CHI_SQUARE_ALPHA);
    let inst = BanditInstance::two_group(arms, 0.5, 0.2).unwrap();
    let budget = CpsRule::Theorem44I.budget(&inst, 1000, 0.5);
    let mut pass = true;
    let mut parts = Vec::new();
    for (alg, spec) in [("pss", AgentSpec::Pss { u: 2.0 }), ("sh", AgentSpec::Sh), ("up", AgentSpec::Up)] {
        let mut counts = vec![0usize; arms];
        for i in 0..STRATEGY_I_TRIALS as u64 {
            let out = run_trial_traced(&inst, &spec, &AdversarySpec::OneToZero, 1000, budget, TrialSeeds::derive(17, i), false)
                .expect("trial runs");
            counts[out.result.output.index()] += 1;
        }
        let n = STRATEGY_I_TRIALS as f64;
        let expected = n / arms as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        let p = 1.0 / arms as f64;
        let rate = counts[inst.best_arm().index()] as f64 / n;
        let sigma = (p * (1.0 - p) / n).sqrt();
        let ok = chi2 <= critical && (rate - p).abs() <= 3.0 * sigma;
        pass &= ok;
        parts.push(format!("{alg} χ²={chi2:.2} success={rate:.4}"));
    }
    verdict(
        pass,
        format!("{} (χ² critical {critical:.2}, success 0.1 ± {:.4})", parts.join(", "), 3.0 * (0.09 / STRATEGY_I_TRIALS as f64).sqrt()),
    )
}

fn invariants() -> Verdict {
    let mut failures: Vec<String> = Vec::new();

    // feasibility of the phase schedule
    let mut grid = 0;
    for arms in [2usize, 3, 5, 8, 10, 16, 27, 32, 64, 100, 128] {
        for u in [1.1, 1.5, 2.0, 3.0, std::f64::consts::E, arms as f64] {
            if u > arms as f64 {
                continue;
            }
            for horizon in [1usize, 7, 100, 1000, 20_000] {
                if let Ok(s) = PhaseSchedule::pss(arms, horizon, u) {
                    grid += 1;
                    if s.steps_used() > horizon || *s.active_sizes().last().unwrap() != 1 {
                        failures.push(format!("schedule L={arms} u={u} T={horizon}"));
                    }
                }
            }
        }
    }

    // ledger and range on traced trials of every pairing
    let inst = BanditInstance::two_group(8, 0.6, 0.2).unwrap();
    let mut traced = 0;
    for adversary in AdversarySpec::ALL {
        for agent in [AgentSpec::Pss { u: 2.0 }, AgentSpec::Pss { u: 8.0 }, AgentSpec::Sh, AgentSpec::Up] {
            for (k, rule) in CpsRule::ALL.into_iter().enumerate() {
                let budget = rule.budget(&inst, 600, 0.5);
                let out = run_trial_traced(&inst, &agent, &adversary, 600, budget, TrialSeeds::derive(k as u64, 1), true)
                    .expect("shipped adversaries never overdraw");
                traced += 1;
                let in_range = out.rounds.iter().all(|r| r.corrupted.iter().all(|w| (0.0..=1.0).contains(w)));
                if out.ledger.spent() > budget || !in_range {
                    failures.push(format!("ledger/range {adversary} vs {agent} under {rule}"));
                }
            }
        }
    }

    // hardness measures
    let instances = [
        vec![0.9, 0.6, 0.5, 0.4],
        vec![0.5, 0.45, 0.2, 0.2, 0.2, 0.1],
        vec![0.3, 0.9, 0.1, 0.7, 0.6, 0.65, 0.2, 0.05],
    ];
    for means in instances {
        let inst = BanditInstance::new(means).unwrap();
        let l = inst.num_arms() as f64;
        let base = h2(&inst);
        let mut previous = 0.0;
        for k in 1..=20 {
            let u = 1.0 + (l - 1.0) * k as f64 / 20.0;
            let value = h2_tilde(&inst, u).unwrap();
            if value < base * (1.0 - 1e-12) || value > u * base * (1.0 + 1e-12) || value < previous {
                failures.push(format!("H2~ sandwich/monotone at u={u}"));
            }
            previous = value;
        }
        let limit = h2_tilde(&inst, 1.0 + 1e-6).unwrap();
        if (limit - base).abs() > 1e-4 * base {
            failures.push("H2~ limit at u→1".into());
        }
        let full = h2_tilde(&inst, l).unwrap();
        if (full - l / inst.min_gap().powi(2)).abs() > 1e-9 * full {
            failures.push("H2~ at u=L".into());
        }
    }

    // concentration events under no corruption
    let inst = BanditInstance::two_group(8, 0.6, 0.2).unwrap();
    let mut worst_ratio: f64 = 0.0;
    for a in [0.1, 0.2] {
        let rates = lemma52_event_rate(&inst, 2.0, 6000, a, LEMMA52_TRIALS, 23, AdversarySpec::Noop, 0.0).unwrap();
        for r in &rates {
            let rate = r.upper_rate.max(r.lower_rate);
            worst_ratio = worst_ratio.max(rate / r.bound);
            if rate > r.bound {
                failures.push(format!("event rate a={a} phase {} arm {}: {rate} > {}", r.phase, r.arm, r.bound));
            }
        }
    }

    for f in &failures {
        println!("    {f}");
    }
    verdict(
        failures.is_empty(),
        format!(
            "{grid} schedules, {traced} traced trials, 3 instances × 20 u values, event rates at most {worst_ratio:.3} of bound; {} violations",
            failures.len()
        ),
    )
}

fn determinism() -> Verdict {
    let mut config = ExperimentConfig::two_group(16, 0.5, 0.2, "pss", 1500, 300);
    config.adversary = "coupling".into();
    config.budget = None;
    config.cps_rule = Some("theorem-3.1".into());
    config.lambda = 0.5;
    config.master_seed = 99;
    config.sweep_algorithm = Some(vec!["pss".into(), "sh".into(), "up".into()]);
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in [1, 4] {
        let summaries = with_threads(Some(threads), || run_sweep(&config)).unwrap().unwrap();
        let path = dir.path().join(format!("t{threads}.csv"));
        write_csv(&summaries, &path).unwrap();
        files.push(std::fs::read(&path).unwrap());
    }
    let rerun = with_threads(Some(2), || run_sweep(&config)).unwrap().unwrap();
    let path = dir.path().join("rerun.csv");
    write_csv(&rerun, &path).unwrap();
    files.push(std::fs::read(&path).unwrap());
    let same = files.windows(2).all(|w| w[0] == w[1]);
    verdict(same, format!("CSV bytes identical across 1, 4 and 2 threads: {same}"))
}

/// Not a criterion: the schedule-aware attack with a budget lacking the
/// log factor, which tracks the reference table far more closely.
fn diagnostic() {
    let opts = PresetOptions {
        trials: TRIALS,
        adversary: "schedule-aware".into(),
        cps_rule: "theorem-4.3-nolog".into(),
        ..PresetOptions::default()
    };
    let mut within = 0;
    for ((_, config), row) in presets::table_a1(&opts).into_iter().zip(TABLE_A1) {
        let summaries = run_sweep(&config).expect("table row runs");
        let cells: Vec<String> = summaries
            .iter()
            .zip(row.reference)
            .map(|(s, reference)| {
                within += ((pct(s) - reference).abs() <= TABLE_TOLERANCE) as usize;
                format!("{} {:.1} (ref {reference})", s.algorithm, pct(s))
            })
            .collect();
        println!("INFO  λ={} w*={} w'={}: {}", row.lambda, row.w_star, row.w_prime, cells.join(", "));
    }
    println!("INFO  schedule-aware / theorem-4.3-nolog: {within}/18 table cells within ±{TABLE_TOLERANCE}");
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("C1 table reproduction (L=32, T=2000, theorem-4.3)", table_a1),
        ("C2 long-horizon trend (L=32, λ=9)", fig_a1_trend),
        ("C3 no-corruption sanity", no_corruption),
        ("C4 coupling-attack distribution", coupling_distribution),
        ("C5 Strategy I uniformization", strategy_one_uniform),
        ("C6 invariant suites", invariants),
        ("C7 determinism across parallelism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let v = check();
        failed += (!v.pass) as usize;
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.summary);
    }
    diagnostic();
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
