//! Closed-form sample-complexity bounds for the multi-arm and unified-arm
//! models, and the comparison between them.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::algorithms::{compute_l, MaxCbConfig, PacParams};
use crate::bandit_env::BanditInstance;
use crate::reward_models::TailParams;

/// Every bound evaluated for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub k_size: usize,
    pub eps: f64,
    pub delta: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub beta: f64,
    pub eps0: f64,
    /// Confidence constant after lifting to 10.
    pub l: f64,
    pub n0: u64,
    pub mu_star: f64,
    pub mu_star_k: Vec<f64>,
    pub gaps: Vec<f64>,
    pub thm1_lower: f64,
    pub thm2_core: f64,
    pub thm2_init: f64,
    pub thm2_total: f64,
    pub thm3_lower: f64,
    pub thm4_upper: f64,
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The multi-arm upper bound is below the unified lower bound.
    MultiArmFavored,
    /// The unified upper bound is below the multi-arm upper bound.
    UnifiedFavored,
    Inconclusive,
    /// A single arm makes the two models coincide.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseComparison {
    pub report: BoundReport,
    /// `thm2_core < thm3_lower`.
    pub multi_beats_unified_lower: bool,
    /// `thm2_core > thm4_upper`.
    pub unified_upper_beats_multi: bool,
    pub verdict: Verdict,
}

/// Lower bound for any correct multi-arm algorithm: the sum over all arms
/// but one optimal arm of `ln(3/(16δ)) / (8A·min(ε₀, ε + gap)^β)`.
///
/// The excluded arm is the lowest-index optimal one.
pub fn thm1_lower_bound(instance: &BanditInstance, pac: &PacParams) -> f64 {
    let tail = instance.tail();
    let log_term = (3.0 / (16.0 * pac.delta())).ln();
    let excluded = instance.best_arm();
    instance
        .gaps()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != excluded)
        .map(|(_, &gap)| log_term / (8.0 * tail.envelope(tail.eps0().min(pac.eps() + gap))))
        .sum()
}

/// Upper bound for the confidence-bound sampler, split as
/// `(Σ_k (L − ln δ)/(A·max(ε, gap)^β), |K|·N₀)`.
pub fn thm2_upper_bound(instance: &BanditInstance, pac: &PacParams) -> (f64, f64) {
    let tail = instance.tail();
    let l = compute_l(instance.len(), tail, pac, true);
    let numerator = l + pac.log_inv_delta();
    let core = instance
        .gaps()
        .iter()
        .map(|&gap| numerator / tail.envelope(pac.eps().max(gap)))
        .sum();
    let n0 = (numerator / tail.envelope(tail.eps0())).floor() + 1.0;
    (core, instance.len() as f64 * n0)
}

/// `|K|/(4A·ε^β) · ln(3/(5δ))`.
pub fn thm3_lower_bound(k_size: usize, tail: &TailParams, pac: &PacParams) -> f64 {
    k_size as f64 / (4.0 * tail.envelope(pac.eps())) * (3.0 / (5.0 * pac.delta())).ln()
}

/// `|K|·ln(1/δ)/(A·ε^β) + 2`.
pub fn thm4_upper_bound(k_size: usize, tail: &TailParams, pac: &PacParams) -> f64 {
    k_size as f64 * pac.log_inv_delta() / tail.envelope(pac.eps()) + 2.0
}

/// Per-arm `Θ¹_k = (1 + 2^β)/min(ε₀, ε + gap)^β` and
/// `Θ²_k = 1/max(ε, gap)^β + 1/ε₀^β`.
pub fn theta_terms(instance: &BanditInstance, pac: &PacParams) -> (Vec<f64>, Vec<f64>) {
    let tail = instance.tail();
    let (beta, eps, eps0) = (tail.beta(), pac.eps(), tail.eps0());
    instance
        .gaps()
        .iter()
        .map(|&gap| {
            let t1 = (1.0 + 2f64.powf(beta)) / eps0.min(eps + gap).powf(beta);
            let t2 = 1.0 / eps.max(gap).powf(beta) + 1.0 / eps0.powf(beta);
            (t1, t2)
        })
        .unzip()
}

/// Preconditions under which the bounds hold, as warnings.
fn precondition_warnings(k_size: usize, tail: &TailParams, pac: &PacParams) -> Vec<String> {
    let (a, beta, eps0) = (tail.a(), tail.beta(), tail.eps0());
    let mut w = Vec::new();
    if beta > 1.0 {
        w.push(format!(
            "beta = {beta} > 1: the lower bounds are only established for beta <= 1"
        ));
    }
    if 4.0 * a * eps0.powf(beta) > 1.0 {
        w.push(format!(
            "eps0 = {eps0} exceeds (4A)^(-1/beta) = {}: the multi-arm lower bound is outside its stated range",
            (4.0 * a).powf(-1.0 / beta)
        ));
    }
    let unified_cap = (k_size as f64 / (2.0 * a)).powf(1.0 / beta);
    if eps0 > unified_cap {
        w.push(format!(
            "eps0 = {eps0} exceeds (|K|/(2A))^(1/beta) = {unified_cap}: the unified lower bound is outside its stated range"
        ));
    }
    if pac.eps() >= eps0 {
        w.push(format!("eps = {} is not below eps0 = {eps0}", pac.eps()));
    }
    if pac.delta() >= 3.0 / 16.0 {
        w.push(format!(
            "delta = {} >= 3/16: the multi-arm lower bound is vacuous and reported as 0",
            pac.delta()
        ));
    }
    if pac.delta() >= 0.6 {
        w.push(format!(
            "delta = {} >= 3/5: the unified lower bound is vacuous and reported as 0",
            pac.delta()
        ));
    }
    for msg in &w {
        log::warn!("{msg}");
    }
    w
}

impl BoundReport {
    pub fn evaluate(instance: &BanditInstance, pac: &PacParams) -> Self {
        let tail = *instance.tail();
        let k_size = instance.len();
        let warnings = precondition_warnings(k_size, &tail, pac);
        let (thm2_core, thm2_init) = thm2_upper_bound(instance, pac);
        let (theta1, theta2) = theta_terms(instance, pac);
        let l = compute_l(k_size, &tail, pac, true);
        // a lower bound with a negative log factor says nothing
        let thm1_lower = thm1_lower_bound(instance, pac).max(0.0);
        let thm3_lower = thm3_lower_bound(k_size, &tail, pac).max(0.0);
        Self {
            k_size,
            eps: pac.eps(),
            delta: pac.delta(),
            a: tail.a(),
            beta: tail.beta(),
            eps0: tail.eps0(),
            l,
            n0: MaxCbConfig::new(k_size, &tail, pac, true)
                .map(|c| c.n0())
                .unwrap_or(u64::MAX),
            mu_star: instance.mu_star(),
            mu_star_k: instance.arm_maxima(),
            gaps: instance.gaps(),
            thm1_lower,
            thm2_core,
            thm2_init,
            thm2_total: thm2_core + thm2_init,
            thm3_lower,
            thm4_upper: thm4_upper_bound(k_size, &tail, pac),
            theta1,
            theta2,
            warnings,
        }
    }

    /// Scalar block as `# key,value` lines, then one row per arm with
    /// 1-based indices.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut out = out;
        let scalars: [(&str, String); 15] = [
            ("k_size", self.k_size.to_string()),
            ("eps", self.eps.to_string()),
            ("delta", self.delta.to_string()),
            ("A", self.a.to_string()),
            ("beta", self.beta.to_string()),
            ("eps0", self.eps0.to_string()),
            ("L", self.l.to_string()),
            ("N0", self.n0.to_string()),
            ("mu_star", self.mu_star.to_string()),
            ("thm1_lower", self.thm1_lower.to_string()),
            ("thm2_core", self.thm2_core.to_string()),
            ("thm2_init", self.thm2_init.to_string()),
            ("thm2_total", self.thm2_total.to_string()),
            ("thm3_lower", self.thm3_lower.to_string()),
            ("thm4_upper", self.thm4_upper.to_string()),
        ];
        for (key, value) in scalars {
            writeln!(out, "# {key},{value}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["arm_index", "mu_star_k", "gap", "theta1", "theta2"])?;
        for k in 0..self.k_size {
            w.write_record([
                (k + 1).to_string(),
                self.mu_star_k[k].to_string(),
                self.gaps[k].to_string(),
                self.theta1[k].to_string(),
                self.theta2[k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn case_comparison(instance: &BanditInstance, pac: &PacParams) -> CaseComparison {
    let report = BoundReport::evaluate(instance, pac);
    let multi = report.thm2_core < report.thm3_lower;
    let unified = report.thm2_core > report.thm4_upper;
    let verdict = if report.k_size < 2 {
        Verdict::NotApplicable
    } else if multi {
        Verdict::MultiArmFavored
    } else if unified {
        Verdict::UnifiedFavored
    } else {
        Verdict::Inconclusive
    };
    CaseComparison {
        report,
        multi_beats_unified_lower: multi,
        unified_upper_beats_multi: unified,
        verdict,
    }
}
