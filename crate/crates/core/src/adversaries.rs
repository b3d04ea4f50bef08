//! Corruption strategies.
//!
//! Every strategy corrupts by whole units (`|c| = 1`) and only while at least
//! one unit of budget remains, so none of them can overdraw the ledger.
//!
//! * `noop`: never corrupts.
//! * `coupling`: at every step, if the best arm's raw reward is 1, flips it to
//!   0 with probability `2Δ/w(1)`. While budget lasts the best arm looks like
//!   a Bernoulli arm of mean `w(2) - Δ`, below the runner-up.
//! * `sh-schedule`: the same flip, applied only at the phase-1 steps where
//!   successive halving (round-robin by index) pulls the best arm.
//! * `schedule-aware`: the same flip, applied at every step where the
//!   declared agent kind would pull the best arm: all steps against PSS, the
//!   best arm's block against UP, and the best arm's round-robin slots of
//!   every phase against SH (tracked from the pulls and observations seen so
//!   far).
//! * `one-to-zero` / `zero-to-one`: turns every reward into 0 (resp. 1).

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::agents::{round_robin_pull, AgentKind};
use crate::engine::{Adversary, AdversaryView};
use crate::error::{Error, Result};
use crate::instance::{ArmId, BanditInstance};
use crate::schedule::ShSchedule;
use crate::seed::{self, StreamRng};

/// Instance-derived quantities shared by the targeted attacks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackParams {
    /// `Δ = w(1) - w(2)`.
    pub delta: f64,
    pub target_arm: ArmId,
    /// Probability of flipping a raw 1 of the target arm, `2Δ/w(1)`.
    pub flip_probability: f64,
}

impl AttackParams {
    pub fn for_instance(instance: &BanditInstance) -> Self {
        let delta = instance.min_gap();
        let w1 = instance.best_mean();
        let flip_probability = if w1 > 0.0 { (2.0 * delta / w1).min(1.0) } else { 0.0 };
        Self {
            delta,
            target_arm: instance.best_arm(),
            flip_probability,
        }
    }
}

/// Adversary selected by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdversarySpec {
    Noop,
    Coupling,
    ShSchedule,
    ScheduleAware,
    OneToZero,
    ZeroToOne,
}

impl AdversarySpec {
    pub const ALL: [AdversarySpec; 6] = [
        AdversarySpec::Noop,
        AdversarySpec::Coupling,
        AdversarySpec::ShSchedule,
        AdversarySpec::ScheduleAware,
        AdversarySpec::OneToZero,
        AdversarySpec::ZeroToOne,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AdversarySpec::Noop => "noop",
            AdversarySpec::Coupling => "coupling",
            AdversarySpec::ShSchedule => "sh-schedule",
            AdversarySpec::ScheduleAware => "schedule-aware",
            AdversarySpec::OneToZero => "one-to-zero",
            AdversarySpec::ZeroToOne => "zero-to-one",
        }
    }

    /// Builds a fresh adversary for one trial. `target` is the agent kind the
    /// adversary is told it faces; it never inspects the agent itself.
    pub fn build(
        self,
        instance: &BanditInstance,
        horizon: usize,
        target: AgentKind,
        seed: u64,
    ) -> Result<Box<dyn Adversary + Send>> {
        let rng = seed::stream(seed);
        let params = AttackParams::for_instance(instance);
        Ok(match self {
            AdversarySpec::Noop => Box::new(NoopAdversary),
            AdversarySpec::Coupling => {
                check_coupling_precondition(instance)?;
                Box::new(FlipAttack::new(params, Forecast::Everywhere, rng))
            }
            AdversarySpec::ShSchedule => {
                let schedule = ShSchedule::new(instance.num_arms(), horizon)?;
                Box::new(FlipAttack::new(params, Forecast::ShPhaseOne(schedule), rng))
            }
            AdversarySpec::ScheduleAware => {
                let forecast = match target {
                    AgentKind::Pss => Forecast::Everywhere,
                    AgentKind::Up => {
                        let block = horizon / instance.num_arms();
                        let first = params.target_arm.0 * block + 1;
                        Forecast::Block(first, first + block - 1)
                    }
                    AgentKind::Sh => {
                        Forecast::Halving(Box::new(ShShadow::new(ShSchedule::new(instance.num_arms(), horizon)?)))
                    }
                };
                Box::new(FlipAttack::new(params, forecast, rng))
            }
            AdversarySpec::OneToZero => Box::new(ShiftAttack { toward: 0.0 }),
            AdversarySpec::ZeroToOne => Box::new(ShiftAttack { toward: 1.0 }),
        })
    }
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AdversarySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|a| a.name()).collect();
                Error::config(
                    "adversary",
                    format!("unknown adversary `{s}` (expected one of {})", names.join(", ")),
                )
            })
    }
}

/// The coupling attack needs the disguised best arm, of mean `w(2) - Δ`, to
/// stay above the third arm (or above 0 when there are only two arms).
pub fn check_coupling_precondition(instance: &BanditInstance) -> Result<()> {
    let delta = instance.min_gap();
    let disguised = instance.mean_at_rank(2) - delta;
    let floor = if instance.num_arms() >= 3 {
        instance.mean_at_rank(3)
    } else {
        0.0
    };
    if disguised > floor {
        Ok(())
    } else {
        Err(Error::PreconditionViolated(format!(
            "coupling attack needs w(2) - Δ > {floor}, got w(2) - Δ = {disguised}"
        )))
    }
}

/// Never corrupts.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoopAdversary;

impl Adversary for NoopAdversary {
    fn corrupt(&mut self, _view: &AdversaryView<'_>, _corruption: &mut [f64]) {}
}

/// Steps at which a [`FlipAttack`] is willing to corrupt.
#[derive(Debug, Clone)]
pub enum Forecast {
    Everywhere,
    /// Phase-1 steps at which successive halving pulls the target.
    ShPhaseOne(ShSchedule),
    /// Steps `first..=last`.
    Block(usize, usize),
    Halving(Box<ShShadow>),
}

/// Flips the target arm's raw 1 to 0 with a fixed probability at forecast steps.
#[derive(Debug, Clone)]
pub struct FlipAttack {
    params: AttackParams,
    forecast: Forecast,
    rng: StreamRng,
}

impl FlipAttack {
    pub fn new(params: AttackParams, forecast: Forecast, rng: StreamRng) -> Self {
        Self {
            params,
            forecast,
            rng,
        }
    }

    fn targets(&mut self, view: &AdversaryView<'_>) -> bool {
        let target = self.params.target_arm;
        let t = view.t();
        match &mut self.forecast {
            Forecast::Everywhere => true,
            Forecast::ShPhaseOne(schedule) => {
                let phases = schedule.phases();
                if phases.phase_of(t) != Some(1) {
                    return false;
                }
                let offset = t - phases.window(1).0;
                let all: Vec<ArmId> = (0..phases.arms()).map(ArmId).collect();
                round_robin_pull(&all, schedule.tau(1), offset) == Some(target)
            }
            Forecast::Block(first, last) => (*first..=*last).contains(&t),
            Forecast::Halving(shadow) => shadow.predict(view) == Some(target),
        }
    }
}

impl Adversary for FlipAttack {
    fn corrupt(&mut self, view: &AdversaryView<'_>, corruption: &mut [f64]) {
        // G_t is drawn every step so the stream does not depend on the forecast
        let coin = self.rng.random_bool(self.params.flip_probability);
        let target = self.params.target_arm.0;
        if coin && view.remaining() >= 1.0 && view.raw()[target] == 1.0 && self.targets(view) {
            corruption[target] = -1.0;
        }
    }
}

/// Pushes every reward to `toward` (0 or 1) while a unit of budget remains.
#[derive(Debug, Clone, Copy)]
pub struct ShiftAttack {
    toward: f64,
}

impl Adversary for ShiftAttack {
    fn corrupt(&mut self, view: &AdversaryView<'_>, corruption: &mut [f64]) {
        if view.remaining() < 1.0 {
            return;
        }
        for (c, &w) in corruption.iter_mut().zip(view.raw()) {
            *c = self.toward - w;
        }
    }
}

/// Reconstructs successive halving's active sets from the pulls and observed
/// rewards visible to the adversary, to predict which arm it pulls next.
///
/// Phase 1 is exact. In later phases the belief is the top half of the
/// previous phase by observed sums, ties broken toward lower index; the agent
/// breaks ties at random, so each pull of the first round-robin cycle is used
/// to correct the belief before it matters.
#[derive(Debug, Clone)]
pub struct ShShadow {
    schedule: ShSchedule,
    phase: usize,
    belief: Vec<ArmId>,
    /// Arms of the previous phase with their observed sums, for corrections.
    previous: Vec<(ArmId, f64)>,
    sums: Vec<f64>,
    ingested: usize,
}

impl ShShadow {
    pub fn new(schedule: ShSchedule) -> Self {
        let arms = schedule.phases().arms();
        Self {
            schedule,
            phase: 1,
            belief: (0..arms).map(ArmId).collect(),
            previous: Vec::new(),
            sums: vec![0.0; arms],
            ingested: 0,
        }
    }

    /// Believed active set of the current phase.
    pub fn belief(&self) -> &[ArmId] {
        &self.belief
    }

    /// Arm successive halving is expected to pull at step `view.t()`.
    pub fn predict(&mut self, view: &AdversaryView<'_>) -> Option<ArmId> {
        for s in self.ingested + 1..view.t() {
            self.ingest(s, view.pulled_at(s), view.observed_at(s));
        }
        self.ingested = view.t() - 1;

        let m = self.schedule.phases().phase_of(view.t())?;
        self.advance_to(m);
        let offset = view.t() - self.schedule.phases().window(m).0;
        round_robin_pull(&self.belief, self.schedule.tau(m), offset)
    }

    fn ingest(&mut self, s: usize, pulled: Option<ArmId>, observed: Option<f64>) {
        let (Some(m), Some(arm), Some(value)) = (self.schedule.phases().phase_of(s), pulled, observed) else {
            return;
        };
        self.advance_to(m);
        self.sums[arm.0] += value;
        let offset = s - self.schedule.phases().window(m).0;
        if offset < self.belief.len() && self.belief[offset] != arm {
            self.correct(offset, arm);
        }
    }

    /// The pull at `offset` of the first cycle revealed `arm`: keep the
    /// confirmed prefix, then refill with the best remaining candidates above it.
    fn correct(&mut self, offset: usize, arm: ArmId) {
        let size = self.belief.len();
        let mut revised: Vec<ArmId> = self.belief[..offset].to_vec();
        revised.push(arm);
        let mut candidates: Vec<(ArmId, f64)> = self
            .previous
            .iter()
            .copied()
            .filter(|&(a, _)| a > arm)
            .collect();
        candidates.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        let mut tail: Vec<ArmId> = candidates.into_iter().map(|(a, _)| a).take(size - revised.len()).collect();
        tail.sort_unstable();
        revised.extend(tail);
        self.belief = revised;
    }

    fn advance_to(&mut self, m: usize) {
        while self.phase < m {
            let keep = self.schedule.phases().kept_after(self.phase);
            let mut ranked: Vec<(ArmId, f64)> = self.belief.iter().map(|&a| (a, self.sums[a.0])).collect();
            ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
            let mut kept: Vec<ArmId> = ranked.iter().take(keep).map(|&(a, _)| a).collect();
            kept.sort_unstable();
            self.previous = ranked;
            self.belief = kept;
            self.sums.fill(0.0);
            self.phase += 1;
        }
    }
}
