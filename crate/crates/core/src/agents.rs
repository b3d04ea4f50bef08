//! Fixed-budget best-arm identification agents.
//!
//! * [`PssAgent`]: probabilistic sequential shrinking. Each step of phase `m`
//!   pulls an active arm uniformly at random; at the end of the phase the
//!   `⌈L/u^m⌉` arms with the highest `S_m(i) / n_m` survive.
//! * [`ShAgent`]: successive halving with a fixed round-robin order.
//! * [`UpAgent`]: uniform pull, one contiguous block per arm.
//!
//! All three break ties uniformly at random using their own stream.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::engine::Agent;
use crate::error::{Error, Result};
use crate::instance::ArmId;
use crate::schedule::{PhaseSchedule, ShSchedule};
use crate::seed::{self, StreamRng};

/// Indices of the `k` largest scores; ties are resolved uniformly at random.
pub fn top_k_random_ties(scores: &[f64], k: usize, rng: &mut StreamRng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.shuffle(rng);
    // stable sort keeps the shuffled order among equal scores
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order.truncate(k);
    order
}

/// Agent family, without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Pss,
    Sh,
    Up,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Pss => "pss",
            AgentKind::Sh => "sh",
            AgentKind::Up => "up",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pss" => Ok(AgentKind::Pss),
            "sh" => Ok(AgentKind::Sh),
            "up" => Ok(AgentKind::Up),
            other => Err(Error::config(
                "algorithm",
                format!("unknown algorithm `{other}` (expected pss, sh or up)"),
            )),
        }
    }
}

/// A fully parameterized agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AgentSpec {
    Pss { u: f64 },
    Sh,
    Up,
}

impl AgentSpec {
    pub fn from_kind(kind: AgentKind, u: f64) -> Self {
        match kind {
            AgentKind::Pss => AgentSpec::Pss { u },
            AgentKind::Sh => AgentSpec::Sh,
            AgentKind::Up => AgentSpec::Up,
        }
    }

    pub fn kind(&self) -> AgentKind {
        match self {
            AgentSpec::Pss { .. } => AgentKind::Pss,
            AgentSpec::Sh => AgentKind::Sh,
            AgentSpec::Up => AgentKind::Up,
        }
    }

    pub fn u(&self) -> Option<f64> {
        match self {
            AgentSpec::Pss { u } => Some(*u),
            _ => None,
        }
    }

    /// Checks that an agent can be built for `arms` arms and `horizon` steps.
    pub fn validate(&self, arms: usize, horizon: usize) -> Result<()> {
        match *self {
            AgentSpec::Pss { u } => PhaseSchedule::pss(arms, horizon, u).map(|_| ()),
            AgentSpec::Sh => ShSchedule::new(arms, horizon).map(|_| ()),
            AgentSpec::Up => up_block(arms, horizon).map(|_| ()),
        }
    }

    pub fn build(&self, arms: usize, horizon: usize, seed: u64) -> Result<Box<dyn Agent + Send>> {
        let rng = seed::stream(seed);
        Ok(match *self {
            AgentSpec::Pss { u } => Box::new(PssAgent::new(PhaseSchedule::pss(arms, horizon, u)?, rng)),
            AgentSpec::Sh => Box::new(ShAgent::new(ShSchedule::new(arms, horizon)?, rng)),
            AgentSpec::Up => Box::new(UpAgent::new(arms, horizon, rng)?),
        })
    }
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentSpec::Pss { u } => write!(f, "pss({u})"),
            AgentSpec::Sh => f.write_str("sh"),
            AgentSpec::Up => f.write_str("up"),
        }
    }
}

/// What an eliminating agent saw and decided in one phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord {
    pub phase: usize,
    /// Active arms at the start of the phase, ascending.
    pub active: Vec<ArmId>,
    /// `S_m(i)` for each active arm, aligned with `active`.
    pub sums: Vec<f64>,
    /// Empirical means used for ranking, aligned with `active`.
    pub estimates: Vec<f64>,
    /// Survivors, ascending.
    pub kept: Vec<ArmId>,
}

/// Shared bookkeeping of the two phased agents.
#[derive(Debug, Clone)]
struct Elimination {
    active: Vec<ArmId>,
    sums: Vec<f64>,
    pulls: Vec<Vec<u32>>,
    phase: usize,
    log: Vec<PhaseRecord>,
}

impl Elimination {
    fn new(arms: usize, phases: usize) -> Self {
        Self {
            active: (0..arms).map(ArmId).collect(),
            sums: vec![0.0; arms],
            pulls: vec![vec![0; arms]; phases],
            phase: 1,
            log: Vec::with_capacity(phases),
        }
    }

    fn observe(&mut self, arm: ArmId, reward: f64) {
        self.sums[arm.0] += reward;
        self.pulls[self.phase - 1][arm.0] += 1;
    }

    /// Closes the current phase, keeping `keep` arms ranked by `sum / denominator`.
    fn close_phase(&mut self, denominator: f64, keep: usize, rng: &mut StreamRng) {
        let sums: Vec<f64> = self.active.iter().map(|a| self.sums[a.0]).collect();
        let estimates: Vec<f64> = sums.iter().map(|s| s / denominator).collect();
        let mut kept: Vec<ArmId> = top_k_random_ties(&estimates, keep, rng)
            .into_iter()
            .map(|j| self.active[j])
            .collect();
        kept.sort_unstable();
        self.log.push(PhaseRecord {
            phase: self.phase,
            active: self.active.clone(),
            sums,
            estimates,
            kept: kept.clone(),
        });
        for a in &self.active {
            self.sums[a.0] = 0.0;
        }
        self.active = kept;
        self.phase += 1;
    }
}

/// Probabilistic sequential shrinking with elimination rate `u`.
#[derive(Debug, Clone)]
pub struct PssAgent {
    schedule: PhaseSchedule,
    state: Elimination,
    rng: StreamRng,
}

impl PssAgent {
    pub fn new(schedule: PhaseSchedule, rng: StreamRng) -> Self {
        let state = Elimination::new(schedule.arms(), schedule.phases());
        Self {
            schedule,
            state,
            rng,
        }
    }

    pub fn schedule(&self) -> &PhaseSchedule {
        &self.schedule
    }

    pub fn active(&self) -> &[ArmId] {
        &self.state.active
    }

    /// Closed phases so far.
    pub fn phase_log(&self) -> &[PhaseRecord] {
        &self.state.log
    }

    fn close_through(&mut self, phase: usize) {
        while self.state.phase <= phase.min(self.schedule.phases()) {
            let m = self.state.phase;
            // divide by the expected pull count n_m, not the realized one
            let n_m = self.schedule.expected_pulls(m);
            self.state
                .close_phase(n_m, self.schedule.kept_after(m), &mut self.rng);
        }
    }
}

impl Agent for PssAgent {
    fn select(&mut self, t: usize) -> Option<ArmId> {
        let m = self.schedule.phase_of(t)?;
        self.close_through(m - 1);
        let pick = self.rng.random_range(0..self.state.active.len());
        Some(self.state.active[pick])
    }

    fn observe(&mut self, _t: usize, arm: ArmId, reward: f64) {
        self.state.observe(arm, reward);
    }

    fn recommend(&mut self) -> ArmId {
        self.close_through(self.schedule.phases());
        debug_assert_eq!(self.state.active.len(), 1);
        self.state.active[0]
    }

    fn phase_pulls(&self) -> Vec<Vec<u32>> {
        self.state.pulls.clone()
    }
}

/// Successive halving. In phase `m` the active arms, sorted by index, are
/// pulled round-robin: offset `k` of the phase pulls `A[k mod |A|]` while
/// `k < |A|·τ_m`; later offsets of the phase are idle.
#[derive(Debug, Clone)]
pub struct ShAgent {
    schedule: ShSchedule,
    state: Elimination,
    rng: StreamRng,
}

impl ShAgent {
    pub fn new(schedule: ShSchedule, rng: StreamRng) -> Self {
        let phases = schedule.phases();
        let state = Elimination::new(phases.arms(), phases.phases());
        Self {
            schedule,
            state,
            rng,
        }
    }

    pub fn active(&self) -> &[ArmId] {
        &self.state.active
    }

    pub fn phase_log(&self) -> &[PhaseRecord] {
        &self.state.log
    }

    fn close_through(&mut self, phase: usize) {
        let phases = self.schedule.phases();
        while self.state.phase <= phase.min(phases.phases()) {
            let m = self.state.phase;
            let tau = self.schedule.tau(m) as f64;
            self.state.close_phase(tau, phases.kept_after(m), &mut self.rng);
        }
    }
}

/// Arm that successive halving pulls at offset `offset` of a phase with the
/// given active set and per-arm count, or `None` when the offset is idle.
pub fn round_robin_pull(active: &[ArmId], tau: usize, offset: usize) -> Option<ArmId> {
    if offset < active.len() * tau {
        Some(active[offset % active.len()])
    } else {
        None
    }
}

impl Agent for ShAgent {
    fn select(&mut self, t: usize) -> Option<ArmId> {
        let m = self.schedule.phases().phase_of(t)?;
        self.close_through(m - 1);
        let offset = t - self.schedule.phases().window(m).0;
        round_robin_pull(&self.state.active, self.schedule.tau(m), offset)
    }

    fn observe(&mut self, _t: usize, arm: ArmId, reward: f64) {
        self.state.observe(arm, reward);
    }

    fn recommend(&mut self) -> ArmId {
        self.close_through(self.schedule.phases().phases());
        debug_assert_eq!(self.state.active.len(), 1);
        self.state.active[0]
    }

    fn phase_pulls(&self) -> Vec<Vec<u32>> {
        self.state.pulls.clone()
    }
}

fn up_block(arms: usize, horizon: usize) -> Result<usize> {
    if arms < 2 {
        return Err(Error::TooFewArms { len: arms });
    }
    match horizon / arms {
        0 => Err(Error::HorizonTooShort {
            horizon,
            reason: format!("uniform pull needs at least one pull of each of {arms} arms"),
        }),
        block => Ok(block),
    }
}

/// Uniform pull: arm 0 for `⌊T/L⌋` steps, then arm 1, and so on; the
/// remaining `T - L⌊T/L⌋` steps are idle.
#[derive(Debug, Clone)]
pub struct UpAgent {
    arms: usize,
    block: usize,
    sums: Vec<f64>,
    pulls: Vec<u32>,
    rng: StreamRng,
}

impl UpAgent {
    pub fn new(arms: usize, horizon: usize, rng: StreamRng) -> Result<Self> {
        let block = up_block(arms, horizon)?;
        Ok(Self {
            arms,
            block,
            sums: vec![0.0; arms],
            pulls: vec![0; arms],
            rng,
        })
    }

    /// Pulls per arm, `⌊T/L⌋`.
    pub fn block(&self) -> usize {
        self.block
    }
}

impl Agent for UpAgent {
    fn select(&mut self, t: usize) -> Option<ArmId> {
        let arm = (t - 1) / self.block;
        (arm < self.arms).then_some(ArmId(arm))
    }

    fn observe(&mut self, _t: usize, arm: ArmId, reward: f64) {
        self.sums[arm.0] += reward;
        self.pulls[arm.0] += 1;
    }

    fn recommend(&mut self) -> ArmId {
        let means: Vec<f64> = self.sums.iter().map(|s| s / self.block as f64).collect();
        ArmId(top_k_random_ties(&means, 1, &mut self.rng)[0])
    }

    fn phase_pulls(&self) -> Vec<Vec<u32>> {
        vec![self.pulls.clone()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> StreamRng {
        seed::stream(seed)
    }

    /// Drives an agent over `horizon` steps feeding `reward(arm)`.
    fn drive(agent: &mut dyn Agent, horizon: usize, reward: impl Fn(ArmId) -> f64) -> Vec<Option<ArmId>> {
        let mut pulls = Vec::new();
        for t in 1..=horizon {
            let p = agent.select(t);
            if let Some(arm) = p {
                agent.observe(t, arm, reward(arm));
            }
            pulls.push(p);
        }
        pulls
    }

    #[test]
    fn top_k_prefers_high_scores() {
        let mut r = rng(1);
        let mut top = top_k_random_ties(&[0.1, 0.9, 0.5, 0.7], 2, &mut r);
        top.sort_unstable();
        assert_eq!(top, vec![1, 3]);
    }

    #[test]
    fn top_k_tie_is_fair() {
        let mut r = rng(2);
        let trials = 20_000;
        let wins = (0..trials)
            .filter(|_| top_k_random_ties(&[0.5, 0.5, 0.1], 1, &mut r)[0] == 0)
            .count();
        let p = wins as f64 / trials as f64;
        let sigma = (0.25 / trials as f64).sqrt();
        assert!((p - 0.5).abs() < 3.0 * sigma, "p = {p}");
    }

    #[test]
    fn pss_singleton_and_leftover() {
        let schedule = PhaseSchedule::pss(4, 22, 2.0).unwrap();
        assert_eq!(schedule.steps_used(), 22);
        let schedule = PhaseSchedule::pss(4, 23, 2.0).unwrap();
        let mut agent = PssAgent::new(schedule, rng(3));
        let pulls = drive(&mut agent, 23, |a| if a.0 == 2 { 1.0 } else { 0.0 });
        assert_eq!(pulls[22], None);
        // the last phase has two arms; arm 2 always pays 1 so it must be among them
        assert_eq!(agent.recommend(), ArmId(2));
    }

    #[test]
    fn pss_final_phase_single_arm() {
        // u = 1.5 on 3 arms: sizes 3, 2, 1 ... last phase active set has 2 arms
        let schedule = PhaseSchedule::pss(2, 10, 2.0).unwrap();
        let mut agent = PssAgent::new(schedule, rng(4));
        let pulls = drive(&mut agent, 10, |_| 0.0);
        assert!(pulls.iter().all(Option::is_some));
        let out = agent.recommend();
        assert!(out.0 < 2);
        assert_eq!(agent.active().len(), 1);
    }

    #[test]
    fn pss_estimates_divide_by_expected_pulls() {
        let schedule = PhaseSchedule::pss(2, 10, 2.0).unwrap();
        let mut agent = PssAgent::new(schedule, rng(5));
        // feed a hand-built phase: arm 0 sum 4, arm 1 sum 1
        agent.select(1);
        for (arm, reward) in [(0, 1.0), (0, 1.0), (0, 1.0), (0, 1.0), (1, 1.0), (0, 0.0), (1, 0.0)] {
            agent.observe(1, ArmId(arm), reward);
        }
        agent.recommend();
        let record = &agent.phase_log()[0];
        assert_eq!(record.sums, vec![4.0, 1.0]);
        assert_eq!(record.estimates, vec![0.8, 0.2]);
        assert_eq!(record.kept, vec![ArmId(0)]);
    }

    #[test]
    fn pss_all_zero_is_uniform() {
        let trials = 8000;
        let mut counts = [0usize; 4];
        for s in 0..trials {
            let schedule = PhaseSchedule::pss(4, 40, 2.0).unwrap();
            let mut agent = PssAgent::new(schedule, rng(100 + s));
            drive(&mut agent, 40, |_| 0.0);
            counts[agent.recommend().0] += 1;
        }
        let sigma = (0.25 * 0.75 / trials as f64).sqrt();
        for c in counts {
            let p = c as f64 / trials as f64;
            assert!((p - 0.25).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn sh_round_robin_sequence() {
        let schedule = ShSchedule::new(4, 24).unwrap();
        let mut agent = ShAgent::new(schedule, rng(6));
        let pulls = drive(&mut agent, 24, |a| if a.0 == 3 { 1.0 } else { 0.0 });
        let phase1: Vec<usize> = pulls[..12].iter().map(|p| p.unwrap().0).collect();
        assert_eq!(phase1, vec![0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3]);
        assert_eq!(agent.recommend(), ArmId(3));
    }

    #[test]
    fn sh_idles_after_its_quota() {
        // L = 4, T = 26: N = 13, τ_1 = 3, so offset 12 of phase 1 is idle
        let schedule = ShSchedule::new(4, 26).unwrap();
        let mut agent = ShAgent::new(schedule, rng(7));
        let pulls = drive(&mut agent, 26, |_| 0.5);
        assert!(pulls[..12].iter().all(Option::is_some));
        assert_eq!(pulls[12], None);
        // phase 2: two arms, τ_2 = 6 fills 12 of 13 steps
        assert!(pulls[13..25].iter().all(Option::is_some));
        assert_eq!(pulls[25], None);
    }

    #[test]
    fn sh_schedule_ignores_seed() {
        let reward = |a: ArmId| [0.9, 0.1, 0.6, 0.3, 0.2][a.0];
        let run = |seed| {
            let mut agent = ShAgent::new(ShSchedule::new(5, 60).unwrap(), rng(seed));
            drive(&mut agent, 60, reward)
        };
        assert_eq!(run(1), run(2));
    }

    #[test]
    fn sh_sizes_halve() {
        let mut agent = ShAgent::new(ShSchedule::new(8, 240).unwrap(), rng(8));
        drive(&mut agent, 240, |a| a.0 as f64 / 8.0);
        agent.recommend();
        let sizes: Vec<usize> = agent.phase_log().iter().map(|r| r.active.len()).collect();
        assert_eq!(sizes, vec![8, 4, 2]);
        assert_eq!(agent.active(), &[ArmId(7)]);
    }

    #[test]
    fn up_blocks() {
        let mut agent = UpAgent::new(3, 10, rng(9)).unwrap();
        let pulls = drive(&mut agent, 10, |_| 0.0);
        let expected: Vec<Option<ArmId>> = [0, 0, 0, 1, 1, 1, 2, 2, 2]
            .into_iter()
            .map(|a| Some(ArmId(a)))
            .chain([None])
            .collect();
        assert_eq!(pulls, expected);
        assert!(matches!(UpAgent::new(3, 2, rng(0)), Err(Error::HorizonTooShort { .. })));
    }

    #[test]
    fn up_recommends_deterministic_winner() {
        let mut agent = UpAgent::new(2, 4, rng(10)).unwrap();
        drive(&mut agent, 4, |a| if a.0 == 0 { 1.0 } else { 0.0 });
        assert_eq!(agent.recommend(), ArmId(0));
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in [AgentKind::Pss, AgentKind::Sh, AgentKind::Up] {
            assert_eq!(kind.name().parse::<AgentKind>().unwrap(), kind);
        }
        assert!("ucb".parse::<AgentKind>().is_err());
    }
}
