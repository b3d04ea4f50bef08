//! Best-arm identification under adversarial reward corruption.
//!
//! The crate simulates fixed-budget best-arm identification on Bernoulli
//! bandits where an adversary may shift rewards before the agent sees them,
//! subject to a total corruption budget.
//!
//! * [`instance`]: bandit instances and gaps.
//! * [`engine`]: the per-step protocol and the corruption ledger.
//! * [`agents`]: PSS(u), successive halving and uniform pull.
//! * [`adversaries`]: corruption strategies.
//! * [`cps`]: named budget rules.
//! * [`analysis`]: hardness measures and closed-form guarantees.
//! * [`harness`]: seeded Monte Carlo experiments, sweeps and CSV output.
//! * [`plot`]: SVG charts of result CSVs.
//! * [`presets`]: built-in experiment configurations.

pub mod adversaries;
pub mod agents;
pub mod analysis;
pub mod cps;
pub mod engine;
pub mod error;
pub mod harness;
pub mod instance;
pub mod plot;
pub mod presets;
pub mod schedule;
pub mod seed;

pub use adversaries::AdversarySpec;
pub use agents::{AgentKind, AgentSpec};
pub use cps::CpsRule;
pub use engine::{run_trial, Agent, Adversary, AdversaryView, TrialResult};
pub use error::{Error, Result};
pub use harness::{run_experiment, run_sweep, ExperimentConfig, ExperimentSummary};
pub use instance::{ArmId, BanditInstance};
