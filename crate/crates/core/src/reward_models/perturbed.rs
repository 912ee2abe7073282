use super::{DistributionError, RewardDistribution};

/// Raw pieces of a [`PerturbedTail`].
///
/// The base law is split at `split`: mass strictly below is scaled by
/// `low_weight`, a base atom sitting exactly at `split` by `atom_weight`, and
/// mass above by `high_weight`. A polynomial tail with density
/// `tail_coef·β·(tail_end − μ)^(β−1)` is added on the window of width
/// `tail_width` ending at `tail_end`, carrying mass `tail_coef·tail_width^β`.
/// The window is given by its width so that this mass does not depend on
/// rounding in `tail_end − tail_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedParts {
    pub base: RewardDistribution,
    pub split: f64,
    pub low_weight: f64,
    pub atom_weight: f64,
    pub high_weight: f64,
    pub tail_width: f64,
    pub tail_end: f64,
    pub tail_coef: f64,
    pub tail_beta: f64,
}

/// A base distribution reweighted piecewise with extra mass pushed above its
/// maximum. CDF, survival and quantile are assembled from the closed-form
/// pieces, so nothing here is estimated.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedTail {
    parts: Box<PerturbedParts>,
    tail_start: f64,
    base_below_split: f64,
    base_at_split: f64,
    atom: f64,
    mass_low: f64,
    mass_atom: f64,
    mass_high: f64,
    mass_tail: f64,
}

impl PerturbedTail {
    pub fn new(parts: PerturbedParts) -> Result<Self, DistributionError> {
        let bad = |msg: String| {
            Err(DistributionError::InvalidParams(format!(
                "perturbed_tail: {msg}"
            )))
        };
        let p = &parts;
        for (name, w) in [
            ("low_weight", p.low_weight),
            ("atom_weight", p.atom_weight),
            ("high_weight", p.high_weight),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return bad(format!("{name} = {w} must be nonnegative"));
            }
        }
        if !(p.tail_coef.is_finite()
            && p.tail_coef > 0.0
            && p.tail_beta.is_finite()
            && p.tail_beta > 0.0)
        {
            return bad("tail coefficient and exponent must be positive".into());
        }
        if !(p.tail_width.is_finite() && p.tail_width > 0.0 && p.tail_end.is_finite()) {
            return bad(format!(
                "tail window of width {} ending at {}",
                p.tail_width, p.tail_end
            ));
        }
        let base_max = p.base.max_reward();
        let slack = 4.0 * f64::EPSILON * base_max.abs().max(p.tail_end.abs());
        if p.tail_end - p.tail_width < base_max - slack {
            return bad(format!(
                "tail window starts at {} below the base maximum {base_max}",
                p.tail_end - p.tail_width
            ));
        }
        // a start rounded an ulp below the base maximum is lifted onto it
        let tail_start = (p.tail_end - p.tail_width).max(base_max);
        if !p.split.is_finite() {
            return bad("split must be finite".into());
        }
        let base_below_split = p.base.cdf_left(p.split);
        let base_at_split = p.base.cdf(p.split);
        let atom = (base_at_split - base_below_split).max(0.0);
        let mass_low = p.low_weight * base_below_split;
        let mass_atom = p.atom_weight * atom;
        let mass_high = p.high_weight * (1.0 - base_at_split);
        let mass_tail = p.tail_coef * p.tail_width.powf(p.tail_beta);
        Ok(Self {
            parts: Box::new(parts),
            tail_start,
            base_below_split,
            base_at_split,
            atom,
            mass_low,
            mass_atom,
            mass_high,
            mass_tail,
        })
    }

    pub fn parts(&self) -> &PerturbedParts {
        &self.parts
    }

    /// Base atom mass at the split point.
    pub fn split_atom(&self) -> f64 {
        self.atom
    }

    /// Closed-form total mass of all pieces (one for a valid construction).
    pub fn total_mass(&self) -> f64 {
        self.mass_low + self.mass_atom + self.mass_high + self.mass_tail
    }

    /// Mass of the added polynomial tail piece.
    pub fn tail_piece_mass(&self) -> f64 {
        self.mass_tail
    }

    pub(super) fn max_reward(&self) -> f64 {
        self.parts.tail_end
    }

    pub(super) fn support_lo(&self) -> f64 {
        self.parts.base.support_lo().min(self.tail_start)
    }

    fn tail_width(&self) -> f64 {
        self.parts.tail_width
    }

    fn tail_cdf(&self, x: f64) -> f64 {
        let p = &self.parts;
        if x <= self.tail_start {
            0.0
        } else if x >= p.tail_end {
            self.mass_tail
        } else {
            p.tail_coef * (self.tail_width().powf(p.tail_beta) - (p.tail_end - x).powf(p.tail_beta))
        }
    }

    fn tail_survival(&self, x: f64) -> f64 {
        let p = &self.parts;
        if x >= p.tail_end {
            0.0
        } else if x <= self.tail_start {
            self.mass_tail
        } else {
            p.tail_coef * (p.tail_end - x).powf(p.tail_beta)
        }
    }

    pub(super) fn cdf(&self, x: f64) -> f64 {
        let p = &self.parts;
        if x < p.split {
            p.low_weight * p.base.cdf(x)
        } else {
            self.mass_low
                + self.mass_atom
                + p.high_weight * (p.base.cdf(x) - self.base_at_split)
                + self.tail_cdf(x)
        }
    }

    pub(super) fn cdf_left(&self, x: f64) -> f64 {
        let p = &self.parts;
        if x <= p.split {
            p.low_weight * p.base.cdf_left(x)
        } else {
            self.mass_low
                + self.mass_atom
                + p.high_weight * (p.base.cdf_left(x) - self.base_at_split)
                + self.tail_cdf(x)
        }
    }

    fn base_survival(&self, x: f64) -> f64 {
        self.base_survival_offset(x, 0.0)
    }

    /// Reweighted base mass above `anchor − d`.
    fn base_survival_offset(&self, anchor: f64, d: f64) -> f64 {
        let p = &self.parts;
        if (anchor - p.split) - d >= 0.0 {
            p.high_weight * p.base.survival_offset(anchor, d)
        } else {
            let above_split = p.base.survival(p.split);
            // base mass on (anchor − d, split)
            let between = (p.base.survival_offset(anchor, d) - above_split - self.atom).max(0.0);
            p.high_weight * above_split + self.mass_atom + p.low_weight * between
        }
    }

    pub(super) fn survival_offset(&self, anchor: f64, d: f64) -> f64 {
        let p = &self.parts;
        let depth = (p.tail_end - anchor) + d;
        let tail = if depth <= 0.0 {
            0.0
        } else {
            p.tail_coef * depth.min(self.tail_width()).powf(p.tail_beta)
        };
        tail + self.base_survival_offset(anchor, d)
    }

    pub(super) fn survival(&self, x: f64) -> f64 {
        self.base_survival(x) + self.tail_survival(x)
    }

    pub(super) fn tail_mass(&self, eps: f64) -> f64 {
        self.survival_offset(self.parts.tail_end, eps)
    }

    /// Generalized inverse, piece by piece.
    pub(super) fn quantile(&self, u: f64) -> f64 {
        let p = &self.parts;
        let low_top = self.mass_low;
        let atom_top = low_top + self.mass_atom;
        let high_top = atom_top + self.mass_high;
        if u <= low_top && self.mass_low > 0.0 {
            p.base
                .quantile_unchecked((u / p.low_weight).min(self.base_below_split))
        } else if u <= atom_top && self.mass_atom > 0.0 {
            p.split
        } else if u <= high_top && self.mass_high > 0.0 {
            let level = self.base_at_split + (u - atom_top) / p.high_weight;
            p.base
                .quantile_unchecked(level.clamp(f64::MIN_POSITIVE, 1.0))
        } else {
            let remaining = (self.mass_tail - (u - high_top)).max(0.0);
            p.tail_end - (remaining / p.tail_coef).powf(1.0 / p.tail_beta)
        }
    }

    /// Sampling map. When the whole base is scaled uniformly (no split), the
    /// base's own sampler is reused so mixtures keep composition sampling.
    pub(super) fn draw(&self, u: f64) -> f64 {
        let p = &self.parts;
        let whole_base =
            p.low_weight == p.atom_weight && self.mass_high == 0.0 && p.low_weight > 0.0;
        if whole_base && u <= self.mass_low + self.mass_atom {
            p.base
                .draw_at_level((u / p.low_weight).clamp(f64::MIN_POSITIVE, 1.0))
        } else {
            self.quantile(u)
        }
    }

    pub(super) fn density(&self, x: f64) -> f64 {
        let p = &self.parts;
        let base = if x < p.split {
            p.low_weight * p.base.density(x)
        } else if x > p.split {
            p.high_weight * p.base.density(x)
        } else {
            0.0
        };
        let tail = if x > self.tail_start && x < p.tail_end {
            p.tail_coef * p.tail_beta * (p.tail_end - x).powf(p.tail_beta - 1.0)
        } else {
            0.0
        };
        base + tail
    }

    pub(super) fn density_offset(&self, anchor: f64, d: f64) -> f64 {
        let p = &self.parts;
        // side of the split from offsets, exact when `anchor` is the split
        let rel = (anchor - p.split) + d;
        let base = if rel < 0.0 {
            p.low_weight * p.base.density_offset(anchor, d)
        } else if rel > 0.0 {
            p.high_weight * p.base.density_offset(anchor, d)
        } else {
            0.0
        };
        let depth = (p.tail_end - anchor) - d;
        let tail = if depth > 0.0 && depth < self.tail_width() {
            p.tail_coef * p.tail_beta * depth.powf(p.tail_beta - 1.0)
        } else {
            0.0
        };
        base + tail
    }

    pub(super) fn atoms(&self) -> Vec<(f64, f64)> {
        let p = &self.parts;
        p.base
            .atoms()
            .into_iter()
            .map(|(x, m)| {
                let w = if x < p.split {
                    p.low_weight
                } else if x == p.split {
                    p.atom_weight
                } else {
                    p.high_weight
                };
                (x, w * m)
            })
            .collect()
    }

    pub(super) fn breakpoints(&self) -> Vec<f64> {
        let p = &self.parts;
        let mut pts = p.base.breakpoints();
        pts.extend([p.split, self.tail_start, p.tail_end]);
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform_case_b() -> RewardDistribution {
        // Uniform(0,1) base, split at 0.75, tail on (1, 1.1]
        let parts = PerturbedParts {
            base: RewardDistribution::uniform(0.0, 1.0).unwrap(),
            split: 0.75,
            low_weight: 0.8,
            atom_weight: 1.0,
            high_weight: 1.0,
            tail_width: 0.1,
            tail_end: 1.1,
            tail_coef: 0.5,
            tail_beta: 1.0,
        };
        RewardDistribution::Perturbed(PerturbedTail::new(parts).unwrap())
    }

    #[test]
    fn piecewise_cdf_values() {
        let d = uniform_case_b();
        // 0.8*0.75 + 0.25 + 0.05 = 0.9
        let RewardDistribution::Perturbed(p) = &d else {
            unreachable!()
        };
        assert_abs_diff_eq!(p.total_mass(), 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(d.cdf(0.5), 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(d.cdf(0.9), 0.6 + 0.15, epsilon = 1e-12);
        assert_abs_diff_eq!(d.cdf(1.05), 0.85 + 0.025, epsilon = 1e-12);
        assert_abs_diff_eq!(d.cdf(2.0), 0.9, epsilon = 1e-12);
        assert_eq!(d.max_reward(), 1.1);
    }

    #[test]
    fn survival_and_tail_mass_agree() {
        let d = uniform_case_b();
        for eps in [0.01, 0.1, 0.2, 0.4, 0.8] {
            assert_abs_diff_eq!(d.tail_mass(eps), d.survival(1.1 - eps), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(d.tail_mass(0.05), 0.025, epsilon = 1e-12);
    }

    #[test]
    fn quantile_inverts_each_piece() {
        let d = uniform_case_b();
        assert_abs_diff_eq!(d.quantile(0.4).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(d.quantile(0.75).unwrap(), 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(d.quantile(0.875).unwrap(), 1.05, epsilon = 1e-12);
    }

    #[test]
    fn reweighted_atom_at_split() {
        let parts = PerturbedParts {
            base: RewardDistribution::point_mass(0.5).unwrap(),
            split: 0.5,
            low_weight: 0.3,
            atom_weight: 0.75,
            high_weight: 1.0,
            tail_width: 0.25,
            tail_end: 0.75,
            tail_coef: 1.0,
            tail_beta: 1.0,
        };
        let d = RewardDistribution::Perturbed(PerturbedTail::new(parts).unwrap());
        assert_eq!(d.cdf(0.49), 0.0);
        assert_abs_diff_eq!(d.cdf(0.5), 0.75, epsilon = 1e-15);
        assert_eq!(d.cdf_left(0.5), 0.0);
        assert_eq!(d.quantile(0.7).unwrap(), 0.5);
        assert_eq!(d.atoms(), vec![(0.5, 0.75)]);
        assert_abs_diff_eq!(d.cdf(0.75), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn tail_window_below_base_max_is_rejected() {
        let parts = PerturbedParts {
            base: RewardDistribution::uniform(0.0, 1.0).unwrap(),
            split: 1.0,
            low_weight: 1.0,
            atom_weight: 1.0,
            high_weight: 1.0,
            tail_width: 0.2,
            tail_end: 1.1,
            tail_coef: 1.0,
            tail_beta: 1.0,
        };
        assert!(PerturbedTail::new(parts).is_err());
    }

    #[test]
    fn singular_base_split_integrates_to_one() {
        // the base density blows up at the split, so mass hides below float spacing there
        let (a, beta, eps0) = (1.03, 0.22, 0.0013);
        let base = RewardDistribution::power_tail(0.9, a, beta).unwrap();
        let parts = PerturbedParts {
            base,
            split: 0.9,
            low_weight: 1.0 - a * f64::powf(eps0, beta),
            atom_weight: 1.0,
            high_weight: 1.0,
            tail_width: eps0,
            tail_end: 0.91,
            tail_coef: a,
            tail_beta: beta,
        };
        let d = RewardDistribution::Perturbed(PerturbedTail::new(parts).unwrap());
        assert_abs_diff_eq!(
            crate::quadrature::total_mass_by_quadrature(&d),
            1.0,
            epsilon = 1e-9
        );
    }
}
