//! Perturbed instances from the lower-bound arguments: each arm in turn is
//! given extra mass just above the overall maximum, and the unified arm is
//! perturbed the same way.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::PacParams;
use crate::bandit_env::{BanditInstance, InstanceError};
use crate::quadrature::{mass_by_quadrature, total_mass_by_quadrature};
use crate::reward_models::{
    check_assumption1, AssumptionCheck, DistributionError, PerturbedParts, PerturbedTail,
    RewardDistribution, TailParams, DEFAULT_CHECK_GRID,
};

const NORMALIZATION_TOL: f64 = 1e-6;
const MAXIMUM_TOL: f64 = 1e-12;
const GAMMA_TOL: f64 = 1e-12;
const GAMMA1_QUADRATURE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdversarialError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("arm {index} has a {kind} law, which has no density/atom split for perturbation")]
    UnsupportedVariant { index: usize, kind: &'static str },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

/// Which branch of the construction applies to an arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionCase {
    /// `ε₀ ≤ μ* − μ*_k + ε`: the whole base is scaled by γ¹.
    Far,
    /// `ε₀ > μ* − μ*_k + ε`: mass below μ̄ is scaled by γ², the atom at μ̄ by γ³.
    Near,
}

/// Hypothesis in which arm `arm` becomes the unique best by at least `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisConstruction {
    /// 0-based arm index.
    pub arm: usize,
    pub case: ConstructionCase,
    pub perturbed: RewardDistribution,
    /// `1 − A·ε₀^β`.
    pub gamma1: f64,
    pub gamma2: Option<f64>,
    pub gamma3: Option<f64>,
    /// `1 − 2A·min(ε₀, μ* − μ*_k + ε)^β`.
    pub gamma_k: f64,
    /// `ln(3/(16δ)) / (4(1 − γ_k))`.
    pub t_k: f64,
    pub mu_bar: Option<f64>,
    /// Base mass at μ̄.
    pub atom_mass: f64,
    /// `μ* − μ*_k + ε`.
    pub shift: f64,
    /// `μ* + ε`.
    pub target_max: f64,
    base_max: f64,
}

/// Hypothesis for the unified arm.
#[derive(Debug, Clone, PartialEq)]
pub struct UnifiedHypothesis {
    pub perturbed: RewardDistribution,
    /// `1 − A·ε^β/|K|`.
    pub gamma: f64,
    /// `ln(3/(5δ)) / (4(1 − γ))`.
    pub t: f64,
    pub target_max: f64,
    /// Tail constants of the unified arm, `(A/|K|, β, ε₀)`.
    pub tail: TailParams,
    base_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionChecks {
    /// `|∫f − 1|` by quadrature.
    pub normalization_error: f64,
    pub normalization: bool,
    pub new_maximum: bool,
    pub assumption: bool,
    pub first_violation: Option<f64>,
    pub gamma_bracket: bool,
    pub passed: bool,
}

impl ConstructionChecks {
    fn new(
        normalization_error: f64,
        new_maximum: bool,
        grid: AssumptionCheck,
        gamma_bracket: bool,
    ) -> Self {
        let normalization = normalization_error < NORMALIZATION_TOL;
        Self {
            normalization_error,
            normalization,
            new_maximum,
            assumption: grid.passed,
            first_violation: grid.first_violation,
            gamma_bracket,
            passed: normalization && new_maximum && grid.passed && gamma_bracket,
        }
    }
}

fn check_pac(
    tail: &TailParams,
    pac: &PacParams,
    delta_cap: f64,
    delta_label: &str,
) -> Result<(), AdversarialError> {
    let fail = |m: String| Err(AdversarialError::Precondition(m));
    if tail.beta() > 1.0 {
        return fail(format!("beta = {} > 1", tail.beta()));
    }
    if pac.eps() >= tail.eps0() {
        return fail(format!(
            "eps = {} must lie in (0, eps0 = {})",
            pac.eps(),
            tail.eps0()
        ));
    }
    if pac.delta() >= delta_cap {
        return fail(format!(
            "delta = {} must be below {delta_label} for a positive threshold",
            pac.delta()
        ));
    }
    Ok(())
}

/// `sup{μ : F(μ) ≤ level}` and the base mass sitting there.
fn mu_bar(
    base: &RewardDistribution,
    level: f64,
    index: usize,
) -> Result<(f64, f64), AdversarialError> {
    match base {
        RewardDistribution::PowerTail(p) => {
            let depth = ((1.0 - level) / p.a()).powf(1.0 / p.beta());
            Ok((p.mu_star() - depth, 0.0))
        }
        RewardDistribution::Uniform(u) => Ok((u.lo() + level * (u.hi() - u.lo()), 0.0)),
        RewardDistribution::PointMass(p) => Ok((p.mu_star(), 1.0)),
        other => Err(AdversarialError::UnsupportedVariant {
            index,
            kind: other.kind(),
        }),
    }
}

/// Builds the hypothesis that makes arm `k` (0-based) best by `ε`.
pub fn build_hypothesis_multi(
    instance: &BanditInstance,
    k: usize,
    pac: &PacParams,
) -> Result<HypothesisConstruction, AdversarialError> {
    let tail = instance.tail();
    let (a, beta, eps0) = (tail.a(), tail.beta(), tail.eps0());
    check_pac(tail, pac, 3.0 / 16.0, "3/16")?;
    if 4.0 * tail.envelope(eps0) > 1.0 + GAMMA_TOL {
        return Err(AdversarialError::Precondition(format!(
            "eps0 = {eps0} exceeds (4A)^(-1/beta) = {}",
            (4.0 * a).powf(-1.0 / beta)
        )));
    }
    let base = instance.arm(k)?.clone();
    let base_max = base.max_reward();
    let target_max = instance.mu_star() + pac.eps();
    let shift = target_max - base_max;
    let gamma1 = 1.0 - tail.envelope(eps0);
    let gamma_k = 1.0 - 2.0 * tail.envelope(eps0.min(shift));
    let t_k = (3.0 / (16.0 * pac.delta())).ln() / (4.0 * (1.0 - gamma_k));

    let (case, parts, gamma2, gamma3, mu_bar_value, atom_mass) = if eps0 <= shift {
        let parts = PerturbedParts {
            base,
            split: base_max,
            low_weight: gamma1,
            atom_weight: gamma1,
            high_weight: 1.0,
            tail_width: eps0.min(shift),
            tail_end: target_max,
            tail_coef: a,
            tail_beta: beta,
        };
        (ConstructionCase::Far, parts, None, None, None, 0.0)
    } else {
        let (bar, _) = mu_bar(&base, gamma1, k)?;
        let below = base.cdf_left(bar);
        let at = base.cdf(bar);
        let atom = at - below;
        let added = tail.envelope(shift);
        let gamma2 = 1.0 - added / gamma1;
        let gamma3 = (atom > 0.0).then(|| (at - added - gamma2 * below) / atom);
        let parts = PerturbedParts {
            base,
            split: bar,
            low_weight: gamma2,
            atom_weight: gamma3.unwrap_or(1.0),
            high_weight: 1.0,
            tail_width: shift,
            tail_end: target_max,
            tail_coef: a,
            tail_beta: beta,
        };
        (
            ConstructionCase::Near,
            parts,
            Some(gamma2),
            gamma3,
            Some(bar),
            atom,
        )
    };

    Ok(HypothesisConstruction {
        arm: k,
        case,
        perturbed: RewardDistribution::Perturbed(PerturbedTail::new(parts)?),
        gamma1,
        gamma2,
        gamma3,
        gamma_k,
        t_k,
        mu_bar: mu_bar_value,
        atom_mass,
        shift,
        target_max,
        base_max,
    })
}

/// Perturbs the unified arm: its law scaled by `γ` plus a tail of
/// coefficient `A/|K|` on `(μ*, μ* + ε]`.
pub fn build_hypothesis_unified(
    instance: &BanditInstance,
    pac: &PacParams,
) -> Result<UnifiedHypothesis, AdversarialError> {
    let tail = instance.tail();
    check_pac(tail, pac, 0.6, "3/5")?;
    let k_size = instance.len() as f64;
    let cap = (k_size / (2.0 * tail.a())).powf(1.0 / tail.beta());
    if tail.eps0() > cap {
        return Err(AdversarialError::Precondition(format!(
            "eps0 = {} exceeds (|K|/(2A))^(1/beta) = {cap}",
            tail.eps0()
        )));
    }
    let unified = instance.unify();
    let base = unified.arms()[0].clone();
    let mu_star = base.max_reward();
    let gamma = 1.0 - tail.envelope(pac.eps()) / k_size;
    let t = (3.0 / (5.0 * pac.delta())).ln() / (4.0 * (1.0 - gamma));
    let target_max = mu_star + pac.eps();
    let parts = PerturbedParts {
        base,
        split: mu_star,
        low_weight: gamma,
        atom_weight: gamma,
        high_weight: 1.0,
        tail_width: pac.eps(),
        tail_end: target_max,
        tail_coef: tail.a() / k_size,
        tail_beta: tail.beta(),
    };
    Ok(UnifiedHypothesis {
        perturbed: RewardDistribution::Perturbed(PerturbedTail::new(parts)?),
        gamma,
        t,
        target_max,
        tail: *unified.tail(),
        base_max: mu_star,
    })
}

impl HypothesisConstruction {
    /// The γ¹ coefficient recovered by integrating the perturbed law up to
    /// the base maximum; meaningful only when the whole base was scaled.
    pub fn gamma1_by_quadrature(&self) -> Option<f64> {
        (self.case == ConstructionCase::Far).then(|| {
            mass_by_quadrature(&self.perturbed, self.perturbed.support_lo(), self.base_max)
        })
    }

    fn gamma_bracket(&self, tail: &TailParams) -> bool {
        match self.case {
            ConstructionCase::Far => {
                let quad_ok = self
                    .gamma1_by_quadrature()
                    .is_some_and(|g| (g - self.gamma1).abs() < GAMMA1_QUADRATURE_TOL);
                quad_ok && self.gamma_k <= self.gamma1 + GAMMA_TOL
            }
            ConstructionCase::Near => {
                let Some(g2) = self.gamma2 else { return false };
                let floor = 1.0 - 2.0 * tail.envelope(self.shift);
                let mut ok = floor <= g2 + GAMMA_TOL
                    && g2 <= 1.0 + GAMMA_TOL
                    && self.gamma_k <= g2 + GAMMA_TOL;
                if let Some(g3) = self.gamma3 {
                    ok &= g3 + GAMMA_TOL >= g2 && self.gamma_k <= g3 + GAMMA_TOL;
                }
                ok
            }
        }
    }
}

/// Normalization, new maximum, tail envelope and γ brackets of a per-arm
/// hypothesis.
pub fn verify_construction(h: &HypothesisConstruction, tail: &TailParams) -> ConstructionChecks {
    let norm = (total_mass_by_quadrature(&h.perturbed) - 1.0).abs();
    let new_max =
        (h.perturbed.max_reward() - h.target_max).abs() <= MAXIMUM_TOL && h.target_max > h.base_max;
    let grid = check_assumption1(&h.perturbed, tail, DEFAULT_CHECK_GRID);
    ConstructionChecks::new(norm, new_max, grid, h.gamma_bracket(tail))
}

/// Same checks for the unified hypothesis, against its own tail constants.
pub fn verify_unified(h: &UnifiedHypothesis, pac: &PacParams) -> ConstructionChecks {
    let norm = (total_mass_by_quadrature(&h.perturbed) - 1.0).abs();
    let new_max =
        (h.perturbed.max_reward() - h.target_max).abs() <= MAXIMUM_TOL && h.target_max > h.base_max;
    let grid = check_assumption1(&h.perturbed, &h.tail, DEFAULT_CHECK_GRID);
    let expected = 1.0 - h.tail.envelope(pac.eps());
    let gamma_ok = (h.gamma - expected).abs() <= GAMMA_TOL
        && (h.perturbed.cdf(h.base_max) - h.gamma).abs() <= GAMMA_TOL
        && h.gamma > 0.0
        && h.gamma < 1.0;
    ConstructionChecks::new(norm, new_max, grid, gamma_ok)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmHypothesisReport {
    /// 1-based arm index.
    pub arm: usize,
    pub case: ConstructionCase,
    pub gamma1: f64,
    pub gamma2: Option<f64>,
    pub gamma3: Option<f64>,
    pub gamma_k: f64,
    pub t_k: f64,
    pub mu_bar: Option<f64>,
    pub atom_mass: f64,
    pub checks: ConstructionChecks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnifiedHypothesisReport {
    pub gamma: f64,
    pub t: f64,
    pub checks: ConstructionChecks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialReport {
    pub schema_version: u32,
    pub eps: f64,
    pub delta: f64,
    pub arms: Vec<ArmHypothesisReport>,
    pub unified: UnifiedHypothesisReport,
    /// The optimal arm has the largest threshold.
    pub t_order: bool,
    pub passed: bool,
}

/// Builds and verifies every per-arm hypothesis and the unified one.
pub fn adversarial_report(
    instance: &BanditInstance,
    pac: &PacParams,
) -> Result<AdversarialReport, AdversarialError> {
    let mut arms = Vec::with_capacity(instance.len());
    for k in 0..instance.len() {
        let h = build_hypothesis_multi(instance, k, pac)?;
        let checks = verify_construction(&h, instance.tail());
        arms.push(ArmHypothesisReport {
            arm: k + 1,
            case: h.case,
            gamma1: h.gamma1,
            gamma2: h.gamma2,
            gamma3: h.gamma3,
            gamma_k: h.gamma_k,
            t_k: h.t_k,
            mu_bar: h.mu_bar,
            atom_mass: h.atom_mass,
            checks,
        });
    }
    let u = build_hypothesis_unified(instance, pac)?;
    let unified = UnifiedHypothesisReport {
        gamma: u.gamma,
        t: u.t,
        checks: verify_unified(&u, pac),
    };
    let best = arms[instance.best_arm()].t_k;
    let t_order = arms.iter().all(|r| best >= r.t_k);
    let passed = t_order && unified.checks.passed && arms.iter().all(|r| r.checks.passed);
    Ok(AdversarialReport {
        schema_version: 1,
        eps: pac.eps(),
        delta: pac.delta(),
        arms,
        unified,
        t_order,
        passed,
    })
}
