//! Hardness measures, PSS(u) guarantees and the corruption-per-step regimes.
//!
//! Ranks are 1-based positions in descending-mean order; `Δ_{1,i}` is the gap
//! of the rank-`i` arm.
//!
//! * `H₂ = max_{i≥2} i / Δ²_{1,i}`
//! * `H̃₂(u) = max_{i≥2} min(u·i, L) / Δ²_{1,i}`
//! * with `M = ⌈log_u L⌉`, PSS(u) outputs an arm with gap above
//!   `ε_C = 8CM/T` with probability at most
//!   `δ = min(1, 4M(L−1)·exp(−⌊T/M⌋ / (192·H̃₂)))`.

use rayon::prelude::*;
use serde::Serialize;

use crate::adversaries::AdversarySpec;
use crate::agents::{AgentKind, PssAgent};
use crate::engine::run_protocol;
use crate::error::{Error, Result};
use crate::instance::BanditInstance;
use crate::schedule::{num_phases, PhaseSchedule};
use crate::seed::{self, TrialSeeds};

/// Squared gaps by rank, ranks `2..=L`.
fn ranked_squared_gaps(instance: &BanditInstance) -> impl Iterator<Item = (usize, f64)> + '_ {
    instance
        .ranked()
        .into_iter()
        .enumerate()
        .skip(1)
        .map(move |(i, arm)| (i + 1, instance.gap(arm).powi(2)))
}

pub fn h2(instance: &BanditInstance) -> f64 {
    ranked_squared_gaps(instance)
        .map(|(rank, g2)| rank as f64 / g2)
        .fold(0.0, f64::max)
}

pub fn h2_tilde(instance: &BanditInstance, u: f64) -> Result<f64> {
    let l = instance.num_arms() as f64;
    if !(u > 1.0 && u <= l) {
        return Err(Error::InvalidU {
            u,
            arms: instance.num_arms(),
        });
    }
    Ok(ranked_squared_gaps(instance)
        .map(|(rank, g2)| (u * rank as f64).min(l) / g2)
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Guarantee {
    pub epsilon_c: f64,
    pub delta_bound: f64,
    pub h2: f64,
    pub h2_tilde: f64,
}

pub fn pss_guarantee(instance: &BanditInstance, horizon: usize, u: f64, budget: f64) -> Result<Guarantee> {
    let h2_tilde = h2_tilde(instance, u)?;
    let phases = num_phases(instance.num_arms(), u)?;
    let phase_len = horizon / phases;
    if phase_len == 0 {
        return Err(Error::HorizonTooShort {
            horizon,
            reason: format!("⌊T/M⌋ = 0 with M = {phases} phases"),
        });
    }
    let m = phases as f64;
    let l = instance.num_arms() as f64;
    let delta_bound = 4.0 * m * (l - 1.0) * (-(phase_len as f64) / (192.0 * h2_tilde)).exp();
    Ok(Guarantee {
        epsilon_c: 8.0 * budget * m / horizon as f64,
        delta_bound: delta_bound.clamp(0.0, 1.0),
        h2: h2(instance),
        h2_tilde,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeClass {
    BaiGuaranteed,
    Intermediate,
    Vacuous,
}

impl RegimeClass {
    pub fn name(self) -> &'static str {
        match self {
            RegimeClass::BaiGuaranteed => "BAI-guaranteed",
            RegimeClass::Intermediate => "intermediate",
            RegimeClass::Vacuous => "vacuous",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CpsRegime {
    /// `C/T`.
    pub cps: f64,
    /// `Δ_{1,2} / (8M)`: below it the guarantee pins down the best arm.
    pub low_threshold: f64,
    /// `Δ_{1,L} / (8M)`: at or above it every arm satisfies the guarantee.
    pub vacuous_threshold: f64,
    /// `Δ_{1,L} / 8`, the `u`-independent version.
    pub extreme_threshold: f64,
    pub classification: RegimeClass,
}

pub fn cps_regime(instance: &BanditInstance, u: f64, budget: f64, horizon: usize) -> Result<CpsRegime> {
    let m = num_phases(instance.num_arms(), u)? as f64;
    let cps = budget / horizon as f64;
    let low_threshold = instance.min_gap() / (8.0 * m);
    let vacuous_threshold = instance.max_gap() / (8.0 * m);
    let classification = if cps < low_threshold {
        RegimeClass::BaiGuaranteed
    } else if cps >= vacuous_threshold {
        RegimeClass::Vacuous
    } else {
        RegimeClass::Intermediate
    };
    Ok(CpsRegime {
        cps,
        low_threshold,
        vacuous_threshold,
        extreme_threshold: instance.max_gap() / 8.0,
        classification,
    })
}

/// One line of the algorithm comparison: orders of the gap bound and of the
/// failure probability, evaluated without constants or clipping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub algorithm: String,
    pub epsilon_c: f64,
    pub delta: f64,
}

pub fn comparison_table(instance: &BanditInstance, horizon: usize, budget: f64, u: f64) -> Result<Vec<ComparisonRow>> {
    let l = instance.num_arms() as f64;
    let t = horizon as f64;
    let c = budget;
    let gap = instance.min_gap();

    let randomized_delta = |u: f64| -> Result<f64> {
        let log_u = l.ln() / u.ln();
        Ok(l * log_u * (-t / (192.0 * h2_tilde(instance, u)? * log_u)).exp())
    };
    let log_u = l.ln() / u.ln();
    let delta_u = randomized_delta(u)?;
    let delta_2 = randomized_delta(2.0_f64.min(l))?;
    let delta_l = l * (-t * gap * gap / (192.0 * l)).exp();

    let row = |name: &str, epsilon_c: f64, delta: f64| ComparisonRow {
        algorithm: name.to_string(),
        epsilon_c,
        delta,
    };
    Ok(vec![
        row(&format!("PSS({u})"), c * log_u / t, delta_u),
        row("PSS(2)", c * l.log2() / t, delta_2),
        row("SH", c * l * l.log2() / t, delta_2),
        row("PSS(L)", c / t, delta_l),
        row("UP", c * l / t, delta_l),
    ])
}

/// Frequency of one concentration event for one (phase, arm) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRate {
    pub phase: usize,
    pub arm: usize,
    /// Expected pulls per active arm in the phase.
    pub n_m: f64,
    /// Trials in which the arm was active in the phase.
    pub samples: usize,
    /// Fraction of those with `ŵ ≥ w + 2C_m/N + 2a`.
    pub upper_rate: f64,
    /// Fraction of those with `ŵ ≤ w − 2C_m/N − 2a`.
    pub lower_rate: f64,
    /// `2·exp(−a²·n_m/3)`.
    pub bound: f64,
}

/// Runs PSS(u) `trials` times and measures how often each phase estimate
/// leaves the band `w ± (2C_m/N + 2a)`, where `C_m` is the corruption spent
/// during phase `m`.
#[allow(clippy::too_many_arguments)]
pub fn lemma52_event_rate(
    instance: &BanditInstance,
    u: f64,
    horizon: usize,
    a: f64,
    trials: usize,
    master_seed: u64,
    adversary: AdversarySpec,
    budget: f64,
) -> Result<Vec<EventRate>> {
    let schedule = PhaseSchedule::pss(instance.num_arms(), horizon, u)?;
    let arms = instance.num_arms();
    let phases = schedule.phases();
    let n = schedule.phase_len() as f64;

    // per trial: (phase, arm, upper, lower) for every active pair
    let per_trial: Vec<Vec<(usize, usize, bool, bool)>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let seeds = TrialSeeds::derive(master_seed, i);
            let mut agent = PssAgent::new(schedule.clone(), seed::stream(seeds.agent));
            let mut adv = adversary.build(instance, horizon, AgentKind::Pss, seeds.adversary)?;
            let out = run_protocol(instance, &mut agent, adv.as_mut(), horizon, budget, seeds.env, false)?;
            let mut events = Vec::new();
            for record in agent.phase_log() {
                let (first, last) = schedule.window(record.phase);
                let c_m = out.ledger.spent_between(first, last);
                let width = 2.0 * c_m / n + 2.0 * a;
                for (arm, est) in record.active.iter().zip(&record.estimates) {
                    let w = instance.mean(*arm);
                    events.push((record.phase, arm.0, *est >= w + width, *est <= w - width));
                }
            }
            Ok(events)
        })
        .collect::<Result<_>>()?;

    let mut samples = vec![vec![0usize; arms]; phases];
    let mut upper = vec![vec![0usize; arms]; phases];
    let mut lower = vec![vec![0usize; arms]; phases];
    for (phase, arm, up, low) in per_trial.into_iter().flatten() {
        samples[phase - 1][arm] += 1;
        upper[phase - 1][arm] += up as usize;
        lower[phase - 1][arm] += low as usize;
    }

    let mut rates = Vec::new();
    for m in 1..=phases {
        let n_m = schedule.expected_pulls(m);
        for arm in 0..arms {
            let count = samples[m - 1][arm];
            if count == 0 {
                continue;
            }
            rates.push(EventRate {
                phase: m,
                arm,
                n_m,
                samples: count,
                upper_rate: upper[m - 1][arm] as f64 / count as f64,
                lower_rate: lower[m - 1][arm] as f64 / count as f64,
                bound: lemma52_bound(a, n_m),
            });
        }
    }
    Ok(rates)
}

pub fn lemma52_bound(a: f64, n_m: f64) -> f64 {
    2.0 * (-a * a * n_m / 3.0).exp()
}
