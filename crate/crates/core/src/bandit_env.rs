//! Bandit instances, per-arm sample accounting and the unified-arm reduction.

use std::time::Duration;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::reward_models::{
    check_assumption1, DistributionError, Mixture, RewardDistribution, TailParams,
    DEFAULT_CHECK_GRID,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("instance has no arms")]
    Empty,
    #[error("arm {index} ({kind}) violates the tail envelope at eps = {eps:e}")]
    TailViolation {
        index: usize,
        kind: &'static str,
        eps: f64,
    },
    #[error("arm index {index} out of range for {len} arms")]
    ArmOutOfRange { index: usize, len: usize },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

/// An ordered set of arms sharing one set of tail constants.
///
/// Arms are 0-based here; reports number them from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    arms: Vec<RewardDistribution>,
    tail: TailParams,
}

impl BanditInstance {
    /// Builds an instance, rejecting any arm that fails the tail check on the
    /// default 64-point grid.
    pub fn new(arms: Vec<RewardDistribution>, tail: TailParams) -> Result<Self, InstanceError> {
        let instance = Self::new_unchecked(arms, tail)?;
        for (index, arm) in instance.arms.iter().enumerate() {
            let check = check_assumption1(arm, &tail, DEFAULT_CHECK_GRID);
            if let Some(eps) = check.first_violation {
                return Err(InstanceError::TailViolation {
                    index,
                    kind: arm.kind(),
                    eps,
                });
            }
        }
        Ok(instance)
    }

    /// Skips the tail check. Used for stress tests and for derived instances
    /// whose compliance follows from their parents.
    pub fn new_unchecked(
        arms: Vec<RewardDistribution>,
        tail: TailParams,
    ) -> Result<Self, InstanceError> {
        if arms.is_empty() {
            return Err(InstanceError::Empty);
        }
        Ok(Self { arms, tail })
    }

    pub fn arms(&self) -> &[RewardDistribution] {
        &self.arms
    }

    pub fn arm(&self, k: usize) -> Result<&RewardDistribution, InstanceError> {
        self.arms.get(k).ok_or(InstanceError::ArmOutOfRange {
            index: k,
            len: self.arms.len(),
        })
    }

    pub fn tail(&self) -> &TailParams {
        &self.tail
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn with_tail(&self, tail: TailParams) -> Result<Self, InstanceError> {
        Self::new(self.arms.clone(), tail)
    }

    /// Per-arm maximal rewards `μ*_k`.
    pub fn arm_maxima(&self) -> Vec<f64> {
        self.arms
            .iter()
            .map(RewardDistribution::max_reward)
            .collect()
    }

    /// Overall maximal reward `μ* = max_k μ*_k`.
    pub fn mu_star(&self) -> f64 {
        self.arms
            .iter()
            .map(RewardDistribution::max_reward)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lowest index among the arms attaining `μ*`.
    pub fn best_arm(&self) -> usize {
        let top = self.mu_star();
        self.arms
            .iter()
            .position(|a| a.max_reward() == top)
            .expect("nonempty instance has a best arm")
    }

    /// Unshifted gaps `μ* − μ*_k`.
    pub fn gaps(&self) -> Vec<f64> {
        let top = self.mu_star();
        self.arms.iter().map(|a| top - a.max_reward()).collect()
    }

    /// Draws one reward from arm `k` and records it in `stats`.
    pub fn sample_arm<R: Rng + ?Sized>(
        &self,
        k: usize,
        stats: &mut ArmStats,
        rng: &mut R,
    ) -> Result<f64, InstanceError> {
        let x = self.arm(k)?.sample(rng);
        stats.record(x);
        Ok(x)
    }

    /// The single arm that picks one of the arms uniformly and samples it,
    /// with tail coefficient `A/|K|`.
    pub fn unify(&self) -> Self {
        let mixture =
            Mixture::uniform_over(&self.arms).expect("equal weights over a nonempty arm set");
        let tail = TailParams::new(
            self.tail.a() / self.len() as f64,
            self.tail.beta(),
            self.tail.eps0(),
        )
        .expect("shrinking A keeps the tail constants valid");
        Self {
            arms: vec![RewardDistribution::Mixture(mixture)],
            tail,
        }
    }
}

/// Sample count `C(k)` and best observed reward `V^k` of one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ArmStats {
    count: u64,
    best: Option<f64>,
}

impl ArmStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn best(&self) -> Option<f64> {
        self.best
    }

    pub fn record(&mut self, x: f64) {
        self.count += 1;
        self.best = Some(match self.best {
            Some(b) if b >= x => b,
            _ => x,
        });
    }
}

/// Index and radius of the arm that triggered a confidence-bound stop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StopCertificate {
    pub arm: usize,
    pub index: f64,
    pub radius: f64,
}

/// Outcome of one algorithm execution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    /// Largest reward sampled from any arm.
    pub value: f64,
    pub total_samples: u64,
    pub per_arm: Vec<ArmStats>,
    #[serde(skip)]
    pub wall_clock: Duration,
    pub certificate: Option<StopCertificate>,
}

impl RunResult {
    pub(crate) fn from_stats(
        per_arm: Vec<ArmStats>,
        wall_clock: Duration,
        certificate: Option<StopCertificate>,
    ) -> Self {
        let total_samples = per_arm.iter().map(ArmStats::count).sum();
        let value = per_arm
            .iter()
            .filter_map(ArmStats::best)
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            value,
            total_samples,
            per_arm,
            wall_clock,
            certificate,
        }
    }
}
