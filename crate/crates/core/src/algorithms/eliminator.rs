use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use super::{floor_count, radius, AlgorithmError, PacParams};
use crate::bandit_env::{ArmStats, BanditInstance, RunResult, StopCertificate};
use crate::reward_models::TailParams;

/// Count fed to the radius after phase `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusArgument {
    /// `S_t = (2^t − 1)·n0`, the per-arm count actually sampled.
    Cumulative,
    /// `(2^t − ½)·n0`, the printed `N_{t+1} − N_0` read with `N_0 = n0/2`.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeConfig {
    l_me: f64,
    n0: u64,
    max_phases: u32,
    radius_arg: RadiusArgument,
}

impl MeConfig {
    pub const DEFAULT_MAX_PHASES: u32 = 62;

    /// `L_ME = ln(12·ln(|K|(1 + (−ln δ)/(A·ε^β))))` and
    /// `n0 = ⌊(L_ME − ln δ)/(A·ε₀^β)⌋ + 1`.
    pub fn new(k_size: usize, tail: &TailParams, pac: &PacParams) -> Result<Self, AlgorithmError> {
        let inner = (k_size as f64 * (1.0 + pac.log_inv_delta() / tail.envelope(pac.eps()))).ln();
        let l_me = (12.0 * inner).ln();
        let n0 = floor_count(l_me + pac.log_inv_delta(), tail, tail.eps0())?;
        Ok(Self {
            l_me,
            n0,
            max_phases: Self::DEFAULT_MAX_PHASES,
            radius_arg: RadiusArgument::Cumulative,
        })
    }

    pub fn with_radius_argument(mut self, arg: RadiusArgument) -> Self {
        self.radius_arg = arg;
        self
    }

    pub fn with_max_phases(mut self, max_phases: u32) -> Self {
        self.max_phases = max_phases;
        self
    }

    pub fn l_me(&self) -> f64 {
        self.l_me
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    pub fn max_phases(&self) -> u32 {
        self.max_phases
    }

    pub fn radius_argument(&self) -> RadiusArgument {
        self.radius_arg
    }
}

/// What happened in one sampling phase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRecord {
    pub phase: u32,
    /// Samples drawn from each surviving arm in this phase.
    pub batch: u64,
    pub radius: f64,
    /// Arms sampled in this phase.
    pub sampled: Vec<usize>,
    /// Arms kept for the next phase; equals `sampled` on the stopping phase.
    pub survivors: Vec<usize>,
}

pub fn run_maximal_eliminator<R: Rng + ?Sized>(
    instance: &BanditInstance,
    pac: &PacParams,
    rng: &mut R,
) -> Result<RunResult, AlgorithmError> {
    let config = MeConfig::new(instance.len(), instance.tail(), pac)?;
    run_maximal_eliminator_with(instance, pac, &config, rng).map(|(r, _)| r)
}

/// Doubling-batch elimination: phase `t` draws `2^(t−1)·n0` samples from
/// every surviving arm, stops once the radius is below `ε`, and otherwise
/// keeps the arms whose index `V^k + UB` reaches the best reward seen.
pub fn run_maximal_eliminator_with<R: Rng + ?Sized>(
    instance: &BanditInstance,
    pac: &PacParams,
    config: &MeConfig,
    rng: &mut R,
) -> Result<(RunResult, Vec<PhaseRecord>), AlgorithmError> {
    let start = Instant::now();
    let tail = instance.tail();
    pac.warn_if_beyond_eps0(tail);
    let numerator = config.l_me + pac.log_inv_delta();

    let mut stats = vec![ArmStats::new(); instance.len()];
    let mut survivors: Vec<usize> = (0..instance.len()).collect();
    let mut cumulative = 0u64;
    let mut trace = Vec::new();

    for phase in 1..=config.max_phases {
        let batch = 1u64
            .checked_shl(phase - 1)
            .and_then(|p| p.checked_mul(config.n0))
            .ok_or(AlgorithmError::CountOverflow(
                2f64.powi(phase as i32 - 1) * config.n0 as f64,
            ))?;
        for &k in &survivors {
            for _ in 0..batch {
                instance.sample_arm(k, &mut stats[k], rng)?;
            }
        }
        cumulative = cumulative
            .checked_add(batch)
            .ok_or(AlgorithmError::CountOverflow(
                cumulative as f64 + batch as f64,
            ))?;

        let arg = match config.radius_arg {
            RadiusArgument::Cumulative => cumulative as f64,
            RadiusArgument::Literal => cumulative as f64 + 0.5 * config.n0 as f64,
        };
        let r = radius(arg, numerator, tail);
        let sampled = survivors.clone();

        if r < pac.eps() {
            let arm = *survivors
                .iter()
                .max_by(|&&a, &&b| best(&stats[a]).total_cmp(&best(&stats[b])).then(b.cmp(&a)))
                .expect("the arm holding the best reward always survives");
            trace.push(PhaseRecord {
                phase,
                batch,
                radius: r,
                sampled,
                survivors: survivors.clone(),
            });
            let certificate = StopCertificate {
                arm,
                index: best(&stats[arm]) + r,
                radius: r,
            };
            return Ok((
                RunResult::from_stats(stats, start.elapsed(), Some(certificate)),
                trace,
            ));
        }

        let leader = survivors
            .iter()
            .map(|&k| best(&stats[k]))
            .fold(f64::NEG_INFINITY, f64::max);
        survivors.retain(|&k| best(&stats[k]) + r >= leader);
        trace.push(PhaseRecord {
            phase,
            batch,
            radius: r,
            sampled,
            survivors: survivors.clone(),
        });
    }
    Err(AlgorithmError::PhaseLimit(config.max_phases))
}

fn best(s: &ArmStats) -> f64 {
    s.best().unwrap_or(f64::NEG_INFINITY)
}
