//! PAC maximum-reward search: the confidence-bound sampler, the doubling
//! eliminator and the unified-arm baseline.
//!
//! Every algorithm is a pure function of `(instance, pac, rng)`; the caller
//! owns the random stream.

mod eliminator;
mod max_cb;
mod unified;

use serde::Serialize;
use thiserror::Error;

use crate::bandit_env::InstanceError;
use crate::reward_models::TailParams;

pub use eliminator::{
    run_maximal_eliminator, run_maximal_eliminator_with, MeConfig, PhaseRecord, RadiusArgument,
};
pub use max_cb::{run_max_cb, run_max_cb_with, MaxCbConfig};
pub use unified::{run_unified_arm, unified_sample_count};

/// Lower limit on `L` under which the correctness guarantee holds.
pub const L_FLOOR: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgorithmError {
    #[error("invalid PAC parameters: {0}")]
    InvalidPac(String),
    #[error("sample count must be positive")]
    ZeroCount,
    #[error("confidence numerator L - ln(delta) = {0} is not positive")]
    NonPositiveNumerator(f64),
    #[error("sample count {0:e} does not fit in a 64-bit counter")]
    CountOverflow(f64),
    #[error("eliminator did not stop within {0} phases")]
    PhaseLimit(u32),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Accuracy `ε` and confidence `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PacParams {
    eps: f64,
    delta: f64,
}

impl PacParams {
    pub fn new(eps: f64, delta: f64) -> Result<Self, AlgorithmError> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(AlgorithmError::InvalidPac(format!(
                "eps must be positive, got {eps}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(AlgorithmError::InvalidPac(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Ok(Self { eps, delta })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `−ln δ`.
    pub fn log_inv_delta(&self) -> f64 {
        -self.delta.ln()
    }

    /// Logs a warning when `ε` lies outside the window where the tail
    /// envelope says anything. Returns whether it does.
    pub fn warn_if_beyond_eps0(&self, tail: &TailParams) -> bool {
        let beyond = self.eps > tail.eps0();
        if beyond {
            log::warn!(
                "eps = {} exceeds eps0 = {}; the tail envelope gives no information there and the bounds lose validity",
                self.eps,
                tail.eps0()
            );
        }
        beyond
    }
}

/// `L = 6·ln(|K|·(1 + (−ln δ)/(A·ε^β)))`, optionally lifted to 10.
pub fn compute_l(k_size: usize, tail: &TailParams, pac: &PacParams, clamp: bool) -> f64 {
    let l = 6.0 * (k_size as f64 * (1.0 + pac.log_inv_delta() / tail.envelope(pac.eps()))).ln();
    if clamp {
        l.max(L_FLOOR)
    } else {
        l
    }
}

/// `UB(n) = ((L − ln δ)/(A·n))^(1/β)`.
pub fn ucb_radius(
    count: u64,
    l: f64,
    tail: &TailParams,
    pac: &PacParams,
) -> Result<f64, AlgorithmError> {
    if count == 0 {
        return Err(AlgorithmError::ZeroCount);
    }
    Ok(radius(count as f64, l + pac.log_inv_delta(), tail))
}

/// Radius with a precomputed numerator `L − ln δ` and a real-valued count.
pub(crate) fn radius(count: f64, numerator: f64, tail: &TailParams) -> f64 {
    (numerator / (tail.a() * count)).powf(1.0 / tail.beta())
}

/// `⌊numerator/(A·w^β)⌋ + 1`, checked against the 64-bit range.
pub(crate) fn floor_count(
    numerator: f64,
    tail: &TailParams,
    width: f64,
) -> Result<u64, AlgorithmError> {
    if numerator <= 0.0 {
        return Err(AlgorithmError::NonPositiveNumerator(numerator));
    }
    let raw = (numerator / tail.envelope(width)).floor() + 1.0;
    to_count(raw)
}

pub(crate) fn to_count(raw: f64) -> Result<u64, AlgorithmError> {
    // 2^63 leaves headroom for the sums taken over arms
    if !raw.is_finite() || raw >= 9.223_372_036_854_776e18 {
        return Err(AlgorithmError::CountOverflow(raw));
    }
    Ok(raw as u64)
}
