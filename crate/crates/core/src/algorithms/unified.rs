use std::time::Instant;

use rand::Rng;

use super::{to_count, AlgorithmError, PacParams};
use crate::bandit_env::{ArmStats, BanditInstance, RunResult};
use crate::reward_models::TailParams;

/// `⌈(−ln δ)·|K|/(A·ε^β)⌉ + 1`.
pub fn unified_sample_count(
    k_size: usize,
    tail: &TailParams,
    pac: &PacParams,
) -> Result<u64, AlgorithmError> {
    let raw = (pac.log_inv_delta() * k_size as f64 / tail.envelope(pac.eps())).ceil() + 1.0;
    to_count(raw)
}

/// Draws a fixed number of rewards from the unified arm and returns the best.
pub fn run_unified_arm<R: Rng + ?Sized>(
    instance: &BanditInstance,
    pac: &PacParams,
    rng: &mut R,
) -> Result<RunResult, AlgorithmError> {
    let start = Instant::now();
    pac.warn_if_beyond_eps0(instance.tail());
    let n = unified_sample_count(instance.len(), instance.tail(), pac)?;
    let unified = instance.unify();
    let mut stats = ArmStats::new();
    for _ in 0..n {
        unified.sample_arm(0, &mut stats, rng)?;
    }
    Ok(RunResult::from_stats(vec![stats], start.elapsed(), None))
}
