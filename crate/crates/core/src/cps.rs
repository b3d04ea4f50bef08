//! Named corruption-budget rules.
//!
//! Each rule turns an instance, a horizon `T` and a slack `λ` into a budget
//! `C`. With `Δ = w(1) - w(2)`:
//!
//! | name                 | C                                  |
//! |----------------------|------------------------------------|
//! | `theorem-3.1`        | `1 + (1+λ)·2ΔT`                    |
//! | `theorem-4.3`        | `(1+λ)·2ΔT / (L·log₂L)`            |
//! | `theorem-4.3-nolog`  | `(1+λ)·2ΔT / L`                    |
//! | `theorem-4.4-I`      | `L·{1 − (1−λ)[1 − w(1)]}·T`        |
//! | `theorem-4.4-II`     | `L·[1 − (1−λ)·w(L)]·T`             |
//!
//! `theorem-4.3-nolog` is a diagnostic variant without the `log₂L` factor.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instance::BanditInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CpsRule {
    Theorem31,
    Theorem43,
    Theorem43NoLog,
    Theorem44I,
    Theorem44II,
}

impl CpsRule {
    pub const ALL: [CpsRule; 5] = [
        CpsRule::Theorem31,
        CpsRule::Theorem43,
        CpsRule::Theorem43NoLog,
        CpsRule::Theorem44I,
        CpsRule::Theorem44II,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CpsRule::Theorem31 => "theorem-3.1",
            CpsRule::Theorem43 => "theorem-4.3",
            CpsRule::Theorem43NoLog => "theorem-4.3-nolog",
            CpsRule::Theorem44I => "theorem-4.4-I",
            CpsRule::Theorem44II => "theorem-4.4-II",
        }
    }

    pub fn budget(self, instance: &BanditInstance, horizon: usize, lambda: f64) -> f64 {
        let l = instance.num_arms() as f64;
        let t = horizon as f64;
        let delta = instance.min_gap();
        match self {
            CpsRule::Theorem31 => 1.0 + (1.0 + lambda) * 2.0 * delta * t,
            CpsRule::Theorem43 => (1.0 + lambda) * 2.0 * delta * t / (l * l.log2()),
            CpsRule::Theorem43NoLog => (1.0 + lambda) * 2.0 * delta * t / l,
            CpsRule::Theorem44I => l * (1.0 - (1.0 - lambda) * (1.0 - instance.best_mean())) * t,
            CpsRule::Theorem44II => l * (1.0 - (1.0 - lambda) * instance.worst_mean()) * t,
        }
    }
}

impl fmt::Display for CpsRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CpsRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|r| r.name()).collect();
            Error::config(
                "cps_rule",
                format!("unknown CPS rule `{s}` (expected one of {})", names.join(", ")),
            )
        })
    }
}
