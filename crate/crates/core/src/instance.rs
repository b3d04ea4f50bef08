//! Bernoulli bandit instances.
//!
//! Arms are identified by their position in the mean vector. Callers may pass
//! means in any order; the best arm and the optimality gaps are computed.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of an arm within its instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArmId(pub usize);

impl ArmId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ArmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A stochastic bandit whose arm `i` pays Bernoulli(`means[i]`) rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    means: Vec<f64>,
    best: ArmId,
    gaps: Vec<f64>,
}

impl BanditInstance {
    /// Validates `means` and computes the best arm and gaps.
    pub fn new(means: Vec<f64>) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::TooFewArms { len: means.len() });
        }
        for (arm, &value) in means.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange { arm, value });
            }
        }

        let mut best = 0;
        for (i, &m) in means.iter().enumerate().skip(1) {
            if m > means[best] {
                best = i;
            }
        }
        if let Some(dup) = (0..means.len()).find(|&i| i != best && means[i] == means[best]) {
            let (first, second) = if dup < best { (dup, best) } else { (best, dup) };
            return Err(Error::NonUniqueBest { first, second });
        }

        let top = means[best];
        let gaps = means.iter().map(|&m| top - m).collect();
        Ok(Self {
            means,
            best: ArmId(best),
            gaps,
        })
    }

    /// One arm at `w_star`, one at `w_star - Δ` and `arms - 2` at `w_prime`,
    /// where `Δ = (w_star - w_prime) / 3`.
    pub fn two_group(arms: usize, w_star: f64, w_prime: f64) -> Result<Self> {
        if arms < 3 {
            return Err(Error::InvalidInstance(format!(
                "two-group instance needs at least 3 arms, got {arms}"
            )));
        }
        if !(w_prime > 0.0 && w_prime < w_star && w_star <= 1.0) {
            return Err(Error::InvalidInstance(format!(
                "two-group instance needs 0 < w' < w* <= 1, got w* = {w_star}, w' = {w_prime}"
            )));
        }
        let delta = (w_star - w_prime) / 3.0;
        let mut means = Vec::with_capacity(arms);
        means.push(w_star);
        means.push(w_star - delta);
        means.resize(arms, w_prime);
        Self::new(means)
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn mean(&self, arm: ArmId) -> f64 {
        self.means[arm.0]
    }

    pub fn best_arm(&self) -> ArmId {
        self.best
    }

    pub fn best_mean(&self) -> f64 {
        self.means[self.best.0]
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn gap(&self, arm: ArmId) -> f64 {
        self.gaps[arm.0]
    }

    /// Arms in descending order of mean; equal means keep input order.
    pub fn ranked(&self) -> Vec<ArmId> {
        let mut order: Vec<usize> = (0..self.means.len()).collect();
        order.sort_by(|&a, &b| self.means[b].total_cmp(&self.means[a]));
        order.into_iter().map(ArmId).collect()
    }

    /// Gap between the best and the second-best arm.
    pub fn min_gap(&self) -> f64 {
        self.gaps[self.ranked()[1].0]
    }

    /// Gap between the best and the worst arm.
    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(0.0, f64::max)
    }

    /// Mean of the `rank`-th best arm (rank 1 is the best).
    pub fn mean_at_rank(&self, rank: usize) -> f64 {
        self.means[self.ranked()[rank - 1].0]
    }

    pub fn worst_mean(&self) -> f64 {
        self.means.iter().copied().fold(1.0, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn sorted_instance_gaps() {
        let inst = BanditInstance::new(vec![0.9, 0.6, 0.5, 0.4]).unwrap();
        assert_eq!(inst.best_arm(), ArmId(0));
        let expected = [0.0, 0.3, 0.4, 0.5];
        for (g, e) in inst.gaps().iter().zip(expected) {
            assert!(close(*g, e), "{g} vs {e}");
        }
    }

    #[test]
    fn duplicated_maximum_rejected() {
        assert!(matches!(
            BanditInstance::new(vec![0.5, 0.5]),
            Err(Error::NonUniqueBest { first: 0, second: 1 })
        ));
        assert!(matches!(
            BanditInstance::new(vec![0.1, 0.7, 0.3, 0.7]),
            Err(Error::NonUniqueBest { first: 1, second: 3 })
        ));
    }

    #[test]
    fn unsorted_two_arm() {
        let inst = BanditInstance::new(vec![0.2, 0.7]).unwrap();
        assert_eq!(inst.best_arm(), ArmId(1));
        assert!(close(inst.gaps()[0], 0.5));
        assert_eq!(inst.gaps()[1], 0.0);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            BanditInstance::new(vec![0.3]),
            Err(Error::TooFewArms { len: 1 })
        ));
        assert!(matches!(
            BanditInstance::new(vec![0.3, 1.2]),
            Err(Error::OutOfRange { arm: 1, .. })
        ));
        assert!(matches!(
            BanditInstance::new(vec![f64::NAN, 0.2]),
            Err(Error::OutOfRange { arm: 0, .. })
        ));
    }

    #[test]
    fn two_group_layout() {
        let inst = BanditInstance::two_group(32, 0.4, 0.2).unwrap();
        assert_eq!(inst.num_arms(), 32);
        let delta = 0.2 / 3.0;
        assert!(close(inst.means()[1], 0.4 - delta));
        assert!(inst.means()[2..].iter().all(|&m| m == 0.2));
        assert!((delta - 0.0667).abs() < 1e-4);

        let small = BanditInstance::two_group(3, 0.5, 0.2).unwrap();
        assert!(close(small.means()[1], 0.4));
        assert_eq!(small.means()[2], 0.2);

        assert!(matches!(
            BanditInstance::two_group(3, 0.2, 0.5),
            Err(Error::InvalidInstance(_))
        ));
        assert!(BanditInstance::two_group(2, 0.5, 0.2).is_err());
    }

    #[test]
    fn ranking_helpers() {
        let inst = BanditInstance::new(vec![0.4, 0.9, 0.5, 0.6]).unwrap();
        assert_eq!(inst.ranked(), vec![ArmId(1), ArmId(3), ArmId(2), ArmId(0)]);
        assert!(close(inst.min_gap(), 0.3));
        assert!(close(inst.max_gap(), 0.5));
        assert_eq!(inst.mean_at_rank(2), 0.6);
        assert_eq!(inst.worst_mean(), 0.4);
    }
}
