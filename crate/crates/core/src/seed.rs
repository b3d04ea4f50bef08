//! Deterministic seed derivation.
//!
//! Every random stream is a `ChaCha8Rng` seeded through `seed_from_u64` with
//! a 64-bit seed derived from the experiment's master seed:
//!
//! ```text
//! splitmix64(z):  z += 0x9E3779B97F4A7C15
//!                 z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!                 z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!                 return z ^ (z >> 31)                       (wrapping arithmetic)
//! mix(a, b)     = splitmix64(a ^ splitmix64(b))
//!
//! trial seed    = mix(master, trial_index)
//! role seed     = mix(trial seed, role)        role: 1 environment, 2 agent, 3 adversary
//! cell seed     = mix(mix(master, 0x5357_4545_50), cell_index)
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Random stream type used by the environment, agents and adversaries.
pub type StreamRng = ChaCha8Rng;

const CELL_TAG: u64 = 0x0053_5745_4550;

pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Role {
    Environment = 1,
    Agent = 2,
    Adversary = 3,
}

pub fn trial_seed(master: u64, trial_index: u64) -> u64 {
    mix(master, trial_index)
}

pub fn role_seed(trial_seed: u64, role: Role) -> u64 {
    mix(trial_seed, role as u64)
}

pub fn cell_seed(master: u64, cell_index: u64) -> u64 {
    mix(mix(master, CELL_TAG), cell_index)
}

pub fn stream(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// Seeds of the three independent streams of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSeeds {
    pub env: u64,
    pub agent: u64,
    pub adversary: u64,
}

impl TrialSeeds {
    pub fn derive(master: u64, trial_index: u64) -> Self {
        Self::from_trial_seed(trial_seed(master, trial_index))
    }

    pub fn from_trial_seed(seed: u64) -> Self {
        Self {
            env: role_seed(seed, Role::Environment),
            agent: role_seed(seed, Role::Agent),
            adversary: role_seed(seed, Role::Adversary),
        }
    }
}
