//! Reward distributions with exact CDFs, generalized-inverse quantiles and
//! inverse-transform samplers, plus the tail-mass compliance check every arm
//! must satisfy.
//!
//! All variants have bounded support `[support_lo, max_reward]`. Continuous
//! variants sample through their closed-form quantile; mixtures sample by
//! composition (one uniform picks the component and is rescaled into it),
//! which is exact in distribution and avoids a root-find per draw.

mod perturbed;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

pub use perturbed::{PerturbedParts, PerturbedTail};

/// Absolute slack allowed when comparing a tail mass against `A·ε^β`.
pub const ASSUMPTION_TOL: f64 = 1e-12;

/// Default grid for the construction-time tail check.
pub const DEFAULT_CHECK_GRID: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("invalid tail parameters: {0}")]
    InvalidTail(String),
    #[error("invalid distribution parameters: {0}")]
    InvalidParams(String),
    #[error("quantile level {0} outside (0, 1]")]
    LevelOutOfRange(f64),
}

/// The known tail-envelope constants: every arm puts at least `A·ε^β` mass
/// within `ε` of its maximum, for all `0 < ε ≤ eps0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailParams {
    #[serde(rename = "A")]
    a: f64,
    beta: f64,
    eps0: f64,
}

impl TailParams {
    pub fn new(a: f64, beta: f64, eps0: f64) -> Result<Self, DistributionError> {
        if !(a.is_finite() && a > 0.0) {
            return Err(DistributionError::InvalidTail(format!(
                "A must be positive, got {a}"
            )));
        }
        if !(beta.is_finite() && beta > 0.0) {
            // beta = 0 leaves the confidence radius exponent 1/beta undefined
            return Err(DistributionError::InvalidTail(format!(
                "beta must be positive (beta = 0 is unsupported), got {beta}"
            )));
        }
        if !(eps0.is_finite() && eps0 > 0.0) {
            return Err(DistributionError::InvalidTail(format!(
                "eps0 must be positive, got {eps0}"
            )));
        }
        let mass = a * eps0.powf(beta);
        if mass > 1.0 {
            return Err(DistributionError::InvalidTail(format!(
                "A*eps0^beta = {mass} exceeds 1"
            )));
        }
        Ok(Self { a, beta, eps0 })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    /// Required tail mass `A·ε^β`.
    pub fn envelope(&self, eps: f64) -> f64 {
        self.a * eps.powf(self.beta)
    }

    pub fn with_eps0(&self, eps0: f64) -> Result<Self, DistributionError> {
        Self::new(self.a, self.beta, eps0)
    }
}

/// `F(μ) = 1 − A(μ* − μ)^β` on `[μ* − A^(−1/β), μ*]`.
///
/// Meets the tail envelope with equality for the same `(A, β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTail {
    mu_star: f64,
    a: f64,
    beta: f64,
}

impl PowerTail {
    pub fn new(mu_star: f64, a: f64, beta: f64) -> Result<Self, DistributionError> {
        if !mu_star.is_finite() {
            return Err(DistributionError::InvalidParams(
                "power_tail: mu_star must be finite".into(),
            ));
        }
        if !(a.is_finite() && a > 0.0 && beta.is_finite() && beta > 0.0) {
            return Err(DistributionError::InvalidParams(format!(
                "power_tail: A and beta must be positive, got A={a}, beta={beta}"
            )));
        }
        Ok(Self { mu_star, a, beta })
    }

    pub fn mu_star(&self) -> f64 {
        self.mu_star
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn width(&self) -> f64 {
        self.a.powf(-1.0 / self.beta)
    }

    fn survival(&self, x: f64) -> f64 {
        if x >= self.mu_star {
            0.0
        } else {
            self.mass_within(self.mu_star - x)
        }
    }

    /// `P(X > μ* − depth)`.
    fn mass_within(&self, depth: f64) -> f64 {
        if depth <= 0.0 {
            0.0
        } else if depth >= self.width() {
            1.0
        } else {
            (self.a * depth.powf(self.beta)).min(1.0)
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        self.mu_star - ((1.0 - u) / self.a).powf(1.0 / self.beta)
    }

    fn density(&self, x: f64) -> f64 {
        let depth = self.mu_star - x;
        if depth <= 0.0 || depth >= self.width() {
            0.0
        } else {
            self.a * self.beta * depth.powf(self.beta - 1.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Uniform {
    lo: f64,
    hi: f64,
}

impl Uniform {
    pub fn new(lo: f64, hi: f64) -> Result<Self, DistributionError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(DistributionError::InvalidParams(format!(
                "uniform: need finite lo < hi, got lo={lo}, hi={hi}"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointMass {
    mu_star: f64,
}

impl PointMass {
    pub fn new(mu_star: f64) -> Result<Self, DistributionError> {
        if !mu_star.is_finite() {
            return Err(DistributionError::InvalidParams(
                "point_mass: mu_star must be finite".into(),
            ));
        }
        Ok(Self { mu_star })
    }

    pub fn mu_star(&self) -> f64 {
        self.mu_star
    }
}

/// Weighted finite mixture. Weights must be nonnegative and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    components: Vec<(f64, RewardDistribution)>,
    cumulative: Vec<f64>,
    lo: f64,
    top: f64,
}

impl Mixture {
    pub fn new(components: Vec<(f64, RewardDistribution)>) -> Result<Self, DistributionError> {
        if components.is_empty() {
            return Err(DistributionError::InvalidParams(
                "mixture: no components".into(),
            ));
        }
        let mut cumulative = Vec::with_capacity(components.len());
        let mut total = 0.0;
        for (w, _) in &components {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(DistributionError::InvalidParams(format!(
                    "mixture: bad weight {w}"
                )));
            }
            total += w;
            cumulative.push(total);
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(DistributionError::InvalidParams(format!(
                "mixture: weights sum to {total}, expected 1"
            )));
        }
        let live = || components.iter().filter(|(w, _)| *w > 0.0).map(|(_, d)| d);
        let top = live()
            .map(|d| d.max_reward())
            .fold(f64::NEG_INFINITY, f64::max);
        let lo = live().map(|d| d.support_lo()).fold(f64::INFINITY, f64::min);
        Ok(Self {
            components,
            cumulative,
            lo,
            top,
        })
    }

    /// Equal-weight mixture of `arms`.
    pub fn uniform_over(arms: &[RewardDistribution]) -> Result<Self, DistributionError> {
        let w = 1.0 / arms.len() as f64;
        Self::new(arms.iter().map(|d| (w, d.clone())).collect())
    }

    pub fn components(&self) -> &[(f64, RewardDistribution)] {
        &self.components
    }

    fn total_weight(&self) -> f64 {
        *self.cumulative.last().expect("nonempty")
    }

    /// Composition draw: the level picks a component and is rescaled into it.
    fn compose(&self, u: f64) -> f64 {
        let target = u * self.total_weight();
        let j = self
            .cumulative
            .partition_point(|&c| c < target)
            .min(self.components.len() - 1);
        let (w, dist) = &self.components[j];
        let below = if j == 0 { 0.0 } else { self.cumulative[j - 1] };
        let local = ((target - below) / w).clamp(f64::MIN_POSITIVE, 1.0);
        dist.draw_at_level(local)
    }

    fn bisect_quantile(&self, u: f64) -> f64 {
        let (mut lo, mut hi) = (self.lo, self.top);
        let probe = |x: f64| {
            self.components
                .iter()
                .map(|(w, d)| w * d.cdf(x))
                .sum::<f64>()
        };
        if probe(lo) >= u {
            return lo;
        }
        // invariant: probe(lo) < u <= probe(hi)
        for _ in 0..2200 {
            let mid = lo + (hi - lo) / 2.0;
            if mid <= lo || mid >= hi {
                break;
            }
            if probe(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// A samplable arm model with a known, finite maximal reward.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardDistribution {
    PowerTail(PowerTail),
    Uniform(Uniform),
    PointMass(PointMass),
    Mixture(Mixture),
    Perturbed(PerturbedTail),
}

impl RewardDistribution {
    pub fn power_tail(mu_star: f64, a: f64, beta: f64) -> Result<Self, DistributionError> {
        PowerTail::new(mu_star, a, beta).map(Self::PowerTail)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self, DistributionError> {
        Uniform::new(lo, hi).map(Self::Uniform)
    }

    pub fn point_mass(mu_star: f64) -> Result<Self, DistributionError> {
        PointMass::new(mu_star).map(Self::PointMass)
    }

    pub fn mixture(components: Vec<(f64, RewardDistribution)>) -> Result<Self, DistributionError> {
        Mixture::new(components).map(Self::Mixture)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::PowerTail(_) => "power_tail",
            Self::Uniform(_) => "uniform",
            Self::PointMass(_) => "point_mass",
            Self::Mixture(_) => "mixture",
            Self::Perturbed(_) => "perturbed_tail",
        }
    }

    /// `inf{μ : F(μ) = 1}`.
    pub fn max_reward(&self) -> f64 {
        match self {
            Self::PowerTail(d) => d.mu_star,
            Self::Uniform(d) => d.hi,
            Self::PointMass(d) => d.mu_star,
            Self::Mixture(m) => m.top,
            Self::Perturbed(p) => p.max_reward(),
        }
    }

    pub fn support_lo(&self) -> f64 {
        match self {
            Self::PowerTail(d) => d.mu_star - d.width(),
            Self::Uniform(d) => d.lo,
            Self::PointMass(d) => d.mu_star,
            Self::Mixture(m) => m.lo,
            Self::Perturbed(p) => p.support_lo(),
        }
    }

    /// `F(μ) = P(X ≤ μ)`.
    pub fn cdf(&self, mu: f64) -> f64 {
        match self {
            Self::PowerTail(d) => 1.0 - d.survival(mu),
            Self::Uniform(d) => ((mu - d.lo) / d.width()).clamp(0.0, 1.0),
            Self::PointMass(d) => {
                if mu >= d.mu_star {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Mixture(m) => m.components.iter().map(|(w, d)| w * d.cdf(mu)).sum(),
            Self::Perturbed(p) => p.cdf(mu),
        }
    }

    /// Left limit `F(μ−) = P(X < μ)`.
    pub fn cdf_left(&self, mu: f64) -> f64 {
        match self {
            Self::PointMass(d) => {
                if mu > d.mu_star {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Mixture(m) => m.components.iter().map(|(w, d)| w * d.cdf_left(mu)).sum(),
            Self::Perturbed(p) => p.cdf_left(mu),
            _ => self.cdf(mu),
        }
    }

    /// `P(X > μ)`, evaluated without the `1 − F` cancellation where possible.
    pub fn survival(&self, mu: f64) -> f64 {
        match self {
            Self::PowerTail(d) => d.survival(mu),
            Self::Uniform(d) => ((d.hi - mu) / d.width()).clamp(0.0, 1.0),
            Self::PointMass(d) => {
                if mu < d.mu_star {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Mixture(m) => m.components.iter().map(|(w, d)| w * d.survival(mu)).sum(),
            Self::Perturbed(p) => p.survival(mu),
        }
    }

    /// `P(X > μ* − ε)`: mass strictly inside the top `ε` window.
    pub fn tail_mass(&self, eps: f64) -> f64 {
        if eps <= 0.0 {
            return 0.0;
        }
        match self {
            Self::PowerTail(d) => d.mass_within(eps),
            Self::Uniform(d) => (eps / d.width()).min(1.0),
            Self::PointMass(_) => 1.0,
            Self::Mixture(m) => m
                .components
                .iter()
                .map(|(w, d)| {
                    let depth = eps - (m.top - d.max_reward());
                    w * d.tail_mass(depth)
                })
                .sum(),
            Self::Perturbed(p) => p.tail_mass(eps),
        }
    }

    /// Generalized inverse `inf{μ : F(μ) ≥ u}` for `u ∈ (0, 1]`.
    pub fn quantile(&self, u: f64) -> Result<f64, DistributionError> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(DistributionError::LevelOutOfRange(u));
        }
        Ok(self.quantile_unchecked(u))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        match self {
            Self::PowerTail(d) => d.quantile(u),
            Self::Uniform(d) => d.lo + u * d.width(),
            Self::PointMass(d) => d.mu_star,
            Self::Mixture(m) => m.bisect_quantile(u),
            Self::Perturbed(p) => p.quantile(u),
        }
    }

    /// Maps a level in `(0, 1]` to a draw with this distribution's law.
    ///
    /// Identical to [`quantile`](Self::quantile) except for mixtures, which
    /// use composition.
    pub(crate) fn draw_at_level(&self, u: f64) -> f64 {
        match self {
            Self::Mixture(m) => m.compose(u),
            Self::Perturbed(p) => p.draw(u),
            _ => self.quantile_unchecked(u),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // random::<f64>() is in [0, 1); flip it onto (0, 1]
        let u = 1.0 - rng.random::<f64>();
        self.draw_at_level(u)
    }

    /// Density of the absolutely continuous part at `x`.
    pub fn density(&self, x: f64) -> f64 {
        match self {
            Self::PowerTail(d) => d.density(x),
            Self::Uniform(d) => {
                if x > d.lo && x < d.hi {
                    1.0 / d.width()
                } else {
                    0.0
                }
            }
            Self::PointMass(_) => 0.0,
            Self::Mixture(m) => m.components.iter().map(|(w, d)| w * d.density(x)).sum(),
            Self::Perturbed(p) => p.density(x),
        }
    }

    /// `P(X > anchor − d)`, with distances to the maximum taken from
    /// `anchor` so that a small `d` is not lost to rounding.
    pub fn survival_offset(&self, anchor: f64, d: f64) -> f64 {
        match self {
            Self::PowerTail(p) => p.mass_within((p.mu_star - anchor) + d),
            Self::Uniform(u) => (((u.hi - anchor) + d) / u.width()).clamp(0.0, 1.0),
            Self::PointMass(p) => {
                if (p.mu_star - anchor) + d > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Mixture(m) => m
                .components
                .iter()
                .map(|(w, c)| w * c.survival_offset(anchor, d))
                .sum(),
            Self::Perturbed(p) => p.survival_offset(anchor, d),
        }
    }

    /// Density at `anchor + d`. Distances to singular points are taken from
    /// `anchor`, so `d` stays meaningful below the float spacing at `anchor`.
    pub fn density_offset(&self, anchor: f64, d: f64) -> f64 {
        match self {
            Self::PowerTail(p) => {
                let depth = (p.mu_star - anchor) - d;
                if depth <= 0.0 || depth >= p.width() {
                    0.0
                } else {
                    p.a * p.beta * depth.powf(p.beta - 1.0)
                }
            }
            Self::Mixture(m) => m
                .components
                .iter()
                .map(|(w, c)| w * c.density_offset(anchor, d))
                .sum(),
            Self::Perturbed(p) => p.density_offset(anchor, d),
            _ => self.density(anchor + d),
        }
    }

    /// Atoms as `(location, mass)` pairs.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Self::PointMass(d) => vec![(d.mu_star, 1.0)],
            Self::Mixture(m) => m
                .components
                .iter()
                .flat_map(|(w, d)| d.atoms().into_iter().map(move |(x, p)| (x, w * p)))
                .collect(),
            Self::Perturbed(p) => p.atoms(),
            _ => Vec::new(),
        }
    }

    /// Points where the density may be non-smooth, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match self {
            Self::Mixture(m) => m
                .components
                .iter()
                .flat_map(|(_, d)| d.breakpoints())
                .collect(),
            Self::Perturbed(p) => p.breakpoints(),
            _ => vec![self.support_lo(), self.max_reward()],
        };
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Outcome of probing the tail envelope on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub passed: bool,
    /// Smallest grid `ε` at which the envelope failed.
    pub first_violation: Option<f64>,
    pub violations: usize,
    pub grid_size: usize,
}

/// Geometric grid of `n` points from `eps0·1e-6` to `eps0`.
pub fn tail_grid(eps0: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                eps0
            } else {
                eps0 * 10f64.powf(-6.0 + 6.0 * i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// Checks `tail_mass(ε) ≥ A·ε^β` on a geometric grid over `(0, eps0]`.
///
/// Exact on the grid for the parametric variants; evidence, not proof,
/// between grid points.
pub fn check_assumption1(
    dist: &RewardDistribution,
    params: &TailParams,
    grid_size: usize,
) -> AssumptionCheck {
    let grid = tail_grid(params.eps0(), grid_size);
    let mut first_violation = None;
    let mut violations = 0;
    for &eps in &grid {
        if dist.tail_mass(eps) + ASSUMPTION_TOL < params.envelope(eps) {
            violations += 1;
            first_violation.get_or_insert(eps);
        }
    }
    AssumptionCheck {
        passed: violations == 0,
        first_violation,
        violations,
        grid_size: grid.len(),
    }
}
