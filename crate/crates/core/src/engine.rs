//! The per-step corruption protocol.
//!
//! Each step `t = 1..=T`:
//!
//! 1. the environment draws a reward for every arm from its own stream;
//! 2. the adversary sees every raw reward so far (including step `t`), its
//!    own past corruptions and the agent's past pulls, and proposes a
//!    corruption vector; the ledger is debited `max_i |c_t(i)|`;
//! 3. the agent picks an arm (or idles) and sees only that arm's corrupted
//!    reward.
//!
//! Agents and adversaries own their random streams, so the three sources of
//! randomness never interfere.

use std::io::Write;
use std::path::Path;

use rand::distr::{Bernoulli, Distribution};
use serde::Serialize;

use crate::adversaries::AdversarySpec;
use crate::agents::AgentSpec;
use crate::error::{Error, Result};
use crate::instance::{ArmId, BanditInstance};
use crate::seed::{self, TrialSeeds};

/// A best-arm-identification policy.
pub trait Agent {
    /// Arm to pull at step `t`, or `None` to idle.
    fn select(&mut self, t: usize) -> Option<ArmId>;

    /// Corrupted reward of the arm pulled at step `t`.
    fn observe(&mut self, t: usize, arm: ArmId, reward: f64);

    /// Final recommendation once the horizon is consumed.
    fn recommend(&mut self) -> ArmId;

    /// Realized pulls per phase and arm.
    fn phase_pulls(&self) -> Vec<Vec<u32>> {
        Vec::new()
    }
}

/// A corruption strategy.
pub trait Adversary {
    /// Writes this step's corruption into `corruption`, which arrives zeroed.
    fn corrupt(&mut self, view: &AdversaryView<'_>, corruption: &mut [f64]);
}

/// What the adversary may look at when choosing `c_t`.
pub struct AdversaryView<'a> {
    t: usize,
    horizon: usize,
    arms: usize,
    raw: &'a [f64],
    corruptions: &'a [f64],
    pulls: &'a [Option<ArmId>],
    budget: f64,
    spent: f64,
}

impl<'a> AdversaryView<'a> {
    /// Assembles a view from flat row-major buffers. `raw` holds steps
    /// `1..=t`, `corruptions` and `pulls` steps `1..t`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        t: usize,
        horizon: usize,
        arms: usize,
        raw: &'a [f64],
        corruptions: &'a [f64],
        pulls: &'a [Option<ArmId>],
        budget: f64,
        spent: f64,
    ) -> Self {
        assert_eq!(raw.len(), t * arms);
        assert_eq!(corruptions.len(), (t - 1) * arms);
        assert_eq!(pulls.len(), t - 1);
        Self {
            t,
            horizon,
            arms,
            raw,
            corruptions,
            pulls,
            budget,
            spent,
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_arms(&self) -> usize {
        self.arms
    }

    /// Raw rewards of the current step.
    pub fn raw(&self) -> &'a [f64] {
        self.raw_at(self.t)
    }

    /// Raw rewards of step `s <= t`.
    pub fn raw_at(&self, s: usize) -> &'a [f64] {
        assert!(s >= 1 && s <= self.t, "raw rewards of step {s} are not visible at step {}", self.t);
        &self.raw[(s - 1) * self.arms..s * self.arms]
    }

    /// Corruption applied at step `s < t`.
    pub fn corruption_at(&self, s: usize) -> &'a [f64] {
        assert!(s >= 1 && s < self.t, "corruption of step {s} is not visible at step {}", self.t);
        &self.corruptions[(s - 1) * self.arms..s * self.arms]
    }

    /// Arm pulled at step `s < t`.
    pub fn pulled_at(&self, s: usize) -> Option<ArmId> {
        assert!(s >= 1 && s < self.t, "pull of step {s} is not visible at step {}", self.t);
        self.pulls[s - 1]
    }

    /// Value the agent observed at step `s < t`, if it pulled.
    pub fn observed_at(&self, s: usize) -> Option<f64> {
        self.pulled_at(s)
            .map(|arm| self.raw_at(s)[arm.0] + self.corruption_at(s)[arm.0])
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn remaining(&self) -> f64 {
        self.budget - self.spent
    }
}

/// Corruption budget and its per-step spending.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionLedger {
    budget: f64,
    spent: f64,
    per_step_costs: Vec<f64>,
}

impl CorruptionLedger {
    pub fn new(budget: f64) -> Self {
        Self {
            budget,
            spent: 0.0,
            per_step_costs: Vec::new(),
        }
    }

    /// Records the cost of step `t`; refuses to overdraw.
    pub fn debit(&mut self, t: usize, cost: f64) -> Result<()> {
        let would_spend = self.spent + cost;
        if would_spend > self.budget {
            return Err(Error::BudgetExceeded {
                t,
                cost,
                would_spend,
                budget: self.budget,
            });
        }
        self.spent = would_spend;
        self.per_step_costs.push(cost);
        Ok(())
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn remaining(&self) -> f64 {
        self.budget - self.spent
    }

    pub fn per_step_costs(&self) -> &[f64] {
        &self.per_step_costs
    }

    /// Corruption spent over steps `first..=last`.
    pub fn spent_between(&self, first: usize, last: usize) -> f64 {
        let hi = last.min(self.per_step_costs.len());
        if first > hi {
            return 0.0;
        }
        self.per_step_costs[first - 1..hi].iter().sum()
    }
}

/// Everything that happened at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub raw: Vec<f64>,
    pub corruption: Vec<f64>,
    pub corrupted: Vec<f64>,
    pub pulled: Option<ArmId>,
    pub observed: Option<f64>,
    pub cost: f64,
    pub spent: f64,
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub output: ArmId,
    pub best_arm: ArmId,
    pub success: bool,
    pub gap_of_output: f64,
    pub budget_spent: f64,
    /// Steps at which the agent pulled an arm.
    pub steps_used: usize,
    pub phase_pulls: Vec<Vec<u32>>,
}

/// A trial result together with its ledger and, when requested, the full trace.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub result: TrialResult,
    pub ledger: CorruptionLedger,
    pub rounds: Vec<RoundRecord>,
}

/// Runs the protocol with already-built participants.
pub fn run_protocol(
    instance: &BanditInstance,
    agent: &mut dyn Agent,
    adversary: &mut dyn Adversary,
    horizon: usize,
    budget: f64,
    env_seed: u64,
    trace: bool,
) -> Result<TrialOutcome> {
    if horizon == 0 {
        return Err(Error::HorizonTooShort {
            horizon,
            reason: "a trial needs at least one step".into(),
        });
    }
    if budget.is_nan() || budget < 0.0 {
        return Err(Error::InvalidInstance(format!(
            "corruption budget must be nonnegative, got {budget}"
        )));
    }

    let arms = instance.num_arms();
    let mut env = seed::stream(env_seed);
    let rewards: Vec<Bernoulli> = instance
        .means()
        .iter()
        .map(|&p| Bernoulli::new(p).expect("means are validated to lie in [0, 1]"))
        .collect();

    let mut raw = vec![0.0; horizon * arms];
    let mut corruptions = vec![0.0; horizon * arms];
    let mut pulls: Vec<Option<ArmId>> = Vec::with_capacity(horizon);
    let mut ledger = CorruptionLedger::new(budget);
    let mut rounds = Vec::new();
    let mut steps_used = 0;
    let mut proposal = vec![0.0; arms];

    for t in 1..=horizon {
        let row = (t - 1) * arms..t * arms;
        for (slot, dist) in raw[row.clone()].iter_mut().zip(&rewards) {
            *slot = if dist.sample(&mut env) { 1.0 } else { 0.0 };
        }

        proposal.fill(0.0);
        let view = AdversaryView::new(
            t,
            horizon,
            arms,
            &raw[..t * arms],
            &corruptions[..(t - 1) * arms],
            &pulls,
            budget,
            ledger.spent(),
        );
        adversary.corrupt(&view, &mut proposal);

        let mut cost: f64 = 0.0;
        for (arm, (&c, &w)) in proposal.iter().zip(&raw[row.clone()]).enumerate() {
            if c.is_nan() || c.abs() > 1.0 {
                return Err(Error::RangeViolation {
                    t,
                    arm,
                    what: "corruption",
                    value: c,
                });
            }
            let corrupted = w + c;
            if !(0.0..=1.0).contains(&corrupted) {
                return Err(Error::RangeViolation {
                    t,
                    arm,
                    what: "corrupted reward",
                    value: corrupted,
                });
            }
            cost = cost.max(c.abs());
        }
        ledger.debit(t, cost)?;
        corruptions[row.clone()].copy_from_slice(&proposal);

        let pulled = agent.select(t);
        let observed = match pulled {
            Some(arm) => {
                if arm.0 >= arms {
                    return Err(Error::InvalidArm { arm: arm.0, arms });
                }
                let value = raw[row.start + arm.0] + proposal[arm.0];
                agent.observe(t, arm, value);
                steps_used += 1;
                Some(value)
            }
            None => None,
        };
        pulls.push(pulled);

        if trace {
            let raw_row = raw[row].to_vec();
            let corrupted = raw_row.iter().zip(&proposal).map(|(w, c)| w + c).collect();
            rounds.push(RoundRecord {
                t,
                raw: raw_row,
                corruption: proposal.clone(),
                corrupted,
                pulled,
                observed,
                cost,
                spent: ledger.spent(),
            });
        }
    }

    let output = agent.recommend();
    if output.0 >= arms {
        return Err(Error::InvalidArm {
            arm: output.0,
            arms,
        });
    }
    let gap_of_output = instance.gap(output);
    let result = TrialResult {
        output,
        best_arm: instance.best_arm(),
        success: output == instance.best_arm(),
        gap_of_output,
        budget_spent: ledger.spent(),
        steps_used,
        phase_pulls: agent.phase_pulls(),
    };
    Ok(TrialOutcome {
        result,
        ledger,
        rounds,
    })
}

/// Builds a fresh agent and adversary from their specs and runs one trial.
pub fn run_trial(
    instance: &BanditInstance,
    agent: &AgentSpec,
    adversary: &AdversarySpec,
    horizon: usize,
    budget: f64,
    seeds: TrialSeeds,
) -> Result<TrialResult> {
    run_trial_traced(instance, agent, adversary, horizon, budget, seeds, false)
        .map(|outcome| outcome.result)
}

/// As [`run_trial`], optionally recording every step.
pub fn run_trial_traced(
    instance: &BanditInstance,
    agent: &AgentSpec,
    adversary: &AdversarySpec,
    horizon: usize,
    budget: f64,
    seeds: TrialSeeds,
    trace: bool,
) -> Result<TrialOutcome> {
    let mut agent_impl = agent.build(instance.num_arms(), horizon, seeds.agent)?;
    let mut adversary_impl = adversary.build(instance, horizon, agent.kind(), seeds.adversary)?;
    run_protocol(
        instance,
        agent_impl.as_mut(),
        adversary_impl.as_mut(),
        horizon,
        budget,
        seeds.env,
        trace,
    )
}

/// True iff the two results agree on every recorded field.
pub fn replay_check(a: &TrialResult, b: &TrialResult) -> bool {
    a == b
}

/// Writes a per-step trace with columns `t,pulled,observed,per_step_cost,spent`.
/// Idle steps leave `pulled` and `observed` empty.
pub fn write_trace_csv(rounds: &[RoundRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "t,pulled,observed,per_step_cost,spent")?;
        for r in rounds {
            let pulled = r.pulled.map(|a| a.0.to_string()).unwrap_or_default();
            let observed = r.observed.map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{},{}", r.t, pulled, observed, r.cost, r.spent)?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}
