//! Phase arithmetic shared by the sequential-elimination agents.
//!
//! The horizon is split into `M = ⌈log_u L⌉` phases of `N = ⌊T/M⌋` steps.
//! Phase `m` (1-based) covers steps `(m-1)N + 1 ..= mN`; the trailing
//! `T - N·M` steps belong to no phase and are idle.

use crate::error::{Error, Result};

/// Slack used when rounding quantities that are mathematically integral but
/// come out of floating-point powers (e.g. `log_3 27`).
const ROUNDING_SLACK: f64 = 1e-9;

fn ceil_slack(x: f64) -> usize {
    (x - ROUNDING_SLACK).ceil().max(1.0) as usize
}

/// `⌈log_u L⌉`, computed as the smallest `m` with `u^m >= L`.
pub fn num_phases(arms: usize, u: f64) -> Result<usize> {
    validate_u(arms, u)?;
    let target = arms as f64 * (1.0 - ROUNDING_SLACK);
    let mut m = 0;
    let mut power = 1.0;
    while power < target {
        power *= u;
        m += 1;
    }
    Ok(m)
}

fn validate_u(arms: usize, u: f64) -> Result<()> {
    if arms < 2 {
        return Err(Error::TooFewArms { len: arms });
    }
    if !(u > 1.0 && u <= arms as f64) {
        return Err(Error::InvalidU { u, arms });
    }
    Ok(())
}

/// `⌈L / u^m⌉` for `m = 0..=phases`.
fn active_sizes(arms: usize, u: f64, phases: usize) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(phases + 1);
    let mut power = 1.0;
    for _ in 0..=phases {
        sizes.push(ceil_slack(arms as f64 / power));
        power *= u;
    }
    sizes
}

/// Phase layout of a sequential-shrinking run with elimination rate `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSchedule {
    arms: usize,
    horizon: usize,
    u: f64,
    phases: usize,
    phase_len: usize,
    active_sizes: Vec<usize>,
}

impl PhaseSchedule {
    /// Schedule for PSS(u) on `arms` arms over `horizon` steps.
    pub fn pss(arms: usize, horizon: usize, u: f64) -> Result<Self> {
        let phases = num_phases(arms, u)?;
        let phase_len = horizon / phases;
        if phase_len == 0 {
            return Err(Error::HorizonTooShort {
                horizon,
                reason: format!("⌊T/M⌋ = 0 with M = {phases} phases"),
            });
        }
        Ok(Self {
            arms,
            horizon,
            u,
            phases,
            phase_len,
            active_sizes: active_sizes(arms, u, phases),
        })
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    /// Number of phases `M`.
    pub fn phases(&self) -> usize {
        self.phases
    }

    /// Steps per phase `N`.
    pub fn phase_len(&self) -> usize {
        self.phase_len
    }

    /// `|A_0|, …, |A_M|`.
    pub fn active_sizes(&self) -> &[usize] {
        &self.active_sizes
    }

    /// Size of the active set going into phase `m` (1-based), `|A_{m-1}|`.
    pub fn active_before(&self, m: usize) -> usize {
        self.active_sizes[m - 1]
    }

    /// Number of arms kept at the end of phase `m`, `|A_m|`.
    pub fn kept_after(&self, m: usize) -> usize {
        self.active_sizes[m]
    }

    /// Per-step selection probability `q_m = 1/|A_{m-1}|`.
    pub fn q(&self, m: usize) -> f64 {
        1.0 / self.active_before(m) as f64
    }

    /// Expected pulls of each active arm in phase `m`, `n_m = q_m N`.
    /// Kept fractional.
    pub fn expected_pulls(&self, m: usize) -> f64 {
        self.phase_len as f64 * self.q(m)
    }

    /// Steps consumed by the phases, `N·M`.
    pub fn steps_used(&self) -> usize {
        self.phase_len * self.phases
    }

    /// 1-based phase containing step `t`, or `None` for leftover steps.
    pub fn phase_of(&self, t: usize) -> Option<usize> {
        if t == 0 || t > self.steps_used() {
            return None;
        }
        Some((t - 1) / self.phase_len + 1)
    }

    /// First and last step of phase `m`, both inclusive.
    pub fn window(&self, m: usize) -> (usize, usize) {
        ((m - 1) * self.phase_len + 1, m * self.phase_len)
    }
}

/// Successive halving: PSS(2) phase windows plus a fixed per-arm pull count
/// `τ_m = ⌊T / (M·|A_{m-1}|)⌋` in every phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ShSchedule {
    phases: PhaseSchedule,
    pulls_per_arm: Vec<usize>,
}

impl ShSchedule {
    pub fn new(arms: usize, horizon: usize) -> Result<Self> {
        if arms < 2 {
            return Err(Error::TooFewArms { len: arms });
        }
        let phases = PhaseSchedule::pss(arms, horizon, 2.0)?;
        let m_total = phases.phases();
        let pulls_per_arm: Vec<usize> = (1..=m_total)
            .map(|m| horizon / (m_total * phases.active_before(m)))
            .collect();
        if let Some(m) = pulls_per_arm.iter().position(|&tau| tau == 0) {
            return Err(Error::HorizonTooShort {
                horizon,
                reason: format!(
                    "successive halving pulls each of {} arms 0 times in phase {}",
                    phases.active_before(m + 1),
                    m + 1
                ),
            });
        }
        Ok(Self {
            phases,
            pulls_per_arm,
        })
    }

    pub fn phases(&self) -> &PhaseSchedule {
        &self.phases
    }

    /// `τ_m` for `m = 1..=M`.
    pub fn pulls_per_arm(&self) -> &[usize] {
        &self.pulls_per_arm
    }

    pub fn tau(&self, m: usize) -> usize {
        self.pulls_per_arm[m - 1]
    }
}
