use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use super::{compute_l, floor_count, radius, AlgorithmError, PacParams};
use crate::bandit_env::{ArmStats, BanditInstance, RunResult, StopCertificate};
use crate::reward_models::TailParams;

/// Confidence constant `L` and warm-up batch `N₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxCbConfig {
    l: f64,
    n0: u64,
    clamp_l: bool,
}

impl MaxCbConfig {
    pub fn new(
        k_size: usize,
        tail: &TailParams,
        pac: &PacParams,
        clamp_l: bool,
    ) -> Result<Self, AlgorithmError> {
        let l = compute_l(k_size, tail, pac, clamp_l);
        let n0 = floor_count(l + pac.log_inv_delta(), tail, tail.eps0())?;
        Ok(Self { l, n0, clamp_l })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    pub fn clamp_l(&self) -> bool {
        self.clamp_l
    }

    /// Pathwise per-arm cap `⌊(L − ln δ)/(A·ε^β)⌋ + 1`.
    pub fn arm_cap(&self, tail: &TailParams, pac: &PacParams) -> Result<u64, AlgorithmError> {
        floor_count(self.l + pac.log_inv_delta(), tail, pac.eps())
    }

    /// Pathwise cap on the total sample count, `|K|` times the per-arm cap.
    pub fn total_cap(
        &self,
        k_size: usize,
        tail: &TailParams,
        pac: &PacParams,
    ) -> Result<u64, AlgorithmError> {
        let per_arm = self.arm_cap(tail, pac)?;
        per_arm
            .checked_mul(k_size as u64)
            .ok_or(AlgorithmError::CountOverflow(
                per_arm as f64 * k_size as f64,
            ))
    }
}

/// Heap entry ordered by index, ties going to the lower arm.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    index: f64,
    arm: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.index
            .total_cmp(&other.index)
            .then_with(|| other.arm.cmp(&self.arm))
    }
}

/// Maximal-confidence-bound search with `L` lifted to at least 10.
pub fn run_max_cb<R: Rng + ?Sized>(
    instance: &BanditInstance,
    pac: &PacParams,
    rng: &mut R,
) -> Result<RunResult, AlgorithmError> {
    let config = MaxCbConfig::new(instance.len(), instance.tail(), pac, true)?;
    run_max_cb_with(instance, pac, &config, rng)
}

/// Samples every arm `N₀` times, then repeatedly samples the arm with the
/// largest index `V^k + UB(C(k))` until that arm's radius drops below `ε`.
///
/// Only the sampled arm's index changes per step, so the argmax is kept in a
/// heap rather than rescanned.
pub fn run_max_cb_with<R: Rng + ?Sized>(
    instance: &BanditInstance,
    pac: &PacParams,
    config: &MaxCbConfig,
    rng: &mut R,
) -> Result<RunResult, AlgorithmError> {
    let start = Instant::now();
    let tail = instance.tail();
    pac.warn_if_beyond_eps0(tail);
    let numerator = config.l + pac.log_inv_delta();
    let index_of = |s: &ArmStats| {
        let best = s.best().expect("every arm is sampled during warm-up");
        best + radius(s.count() as f64, numerator, tail)
    };

    let mut stats = vec![ArmStats::new(); instance.len()];
    let mut heap = BinaryHeap::with_capacity(instance.len());
    for (arm, s) in stats.iter_mut().enumerate() {
        for _ in 0..config.n0 {
            instance.sample_arm(arm, s, rng)?;
        }
        heap.push(Candidate {
            index: index_of(s),
            arm,
        });
    }

    let certificate = loop {
        let top = heap.pop().expect("heap holds one entry per arm");
        let r = radius(stats[top.arm].count() as f64, numerator, tail);
        if r < pac.eps() {
            break StopCertificate {
                arm: top.arm,
                index: top.index,
                radius: r,
            };
        }
        instance.sample_arm(top.arm, &mut stats[top.arm], rng)?;
        heap.push(Candidate {
            index: index_of(&stats[top.arm]),
            arm: top.arm,
        });
    };

    Ok(RunResult::from_stats(
        stats,
        start.elapsed(),
        Some(certificate),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reward_models::RewardDistribution;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_point_mass_hand_trace() {
        let tail = TailParams::new(1.0, 1.0, 0.5).unwrap();
        let inst =
            BanditInstance::new(vec![RewardDistribution::point_mass(1.0).unwrap()], tail).unwrap();
        let pac = PacParams::new(0.25, 0.5).unwrap();
        let cfg = MaxCbConfig::new(1, &tail, &pac, true).unwrap();
        assert_eq!(cfg.l(), 10.0);
        assert_eq!(cfg.n0(), 22);
        let r = run_max_cb(&inst, &pac, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        // stops at the first C with (10 - ln 0.5)/C < 0.25, i.e. C = 43
        assert_eq!(r.total_samples, 43);
        assert_eq!(r.value, 1.0);
        assert_eq!(cfg.arm_cap(&tail, &pac).unwrap(), 43);
    }

    #[test]
    fn point_masses_return_exact_maximum() {
        let tail = TailParams::new(1.0, 1.0, 0.5).unwrap();
        let arms = [0.2, 0.7, 0.4]
            .map(|m| RewardDistribution::point_mass(m).unwrap())
            .to_vec();
        let inst = BanditInstance::new(arms, tail).unwrap();
        let pac = PacParams::new(0.1, 0.1).unwrap();
        let r = run_max_cb(&inst, &pac, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(r.value, 0.7);
        assert_eq!(r.certificate.unwrap().arm, 1);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let a = Candidate { index: 1.0, arm: 3 };
        let b = Candidate { index: 1.0, arm: 1 };
        assert!(b > a);
        let mut heap = BinaryHeap::from(vec![a, b, Candidate { index: 0.5, arm: 0 }]);
        assert_eq!(heap.pop().unwrap().arm, 1);
    }

    #[test]
    fn identical_arms_stop_on_first_arm() {
        let tail = TailParams::new(1.0, 1.0, 0.5).unwrap();
        let arms = vec![RewardDistribution::point_mass(0.5).unwrap(); 3];
        let inst = BanditInstance::new(arms, tail).unwrap();
        let pac = PacParams::new(0.25, 0.5).unwrap();
        let r = run_max_cb(&inst, &pac, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        // round-robin by index until arm 0 reaches the cap first
        let cap = MaxCbConfig::new(3, &tail, &pac, true)
            .unwrap()
            .arm_cap(&tail, &pac)
            .unwrap();
        assert_eq!(r.per_arm[0].count(), cap);
        assert_eq!(r.certificate.unwrap().arm, 0);
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let tail = TailParams::new(1.0, 1.0, 0.5).unwrap();
        let arms = vec![
            RewardDistribution::uniform(0.0, 1.0).unwrap(),
            RewardDistribution::uniform(0.0, 0.5).unwrap(),
        ];
        let inst = BanditInstance::new(arms, tail).unwrap();
        let pac = PacParams::new(0.05, 0.1).unwrap();
        let a = run_max_cb(&inst, &pac, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = run_max_cb(&inst, &pac, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.per_arm, b.per_arm);
    }
}
