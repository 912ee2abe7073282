//! Tanh-sinh quadrature for densities with integrable endpoint
//! singularities.

use std::f64::consts::FRAC_PI_2;

use crate::reward_models::RewardDistribution;

const T_MAX: f64 = 4.5;
const MAX_LEVEL: u32 = 12;

/// Integrates over `[a, b]` a function of the distances `(x − a, b − x)`.
///
/// Passing distances instead of `x` keeps the integrand exact next to an
/// endpoint, where `b − x` would otherwise cancel to zero.
pub fn tanh_sinh<F: Fn(f64, f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a.is_nan() || b.is_nan() || b <= a {
        return 0.0;
    }
    let half = 0.5 * (b - a);
    // contribution of the node at t and its mirror at -t
    let pair = |t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let cosh_s = s.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cosh_s * cosh_s);
        if w == 0.0 {
            return 0.0;
        }
        // 1 − tanh(s) without cancellation
        let near = half * 2.0 / ((2.0 * s).exp() + 1.0);
        if near == 0.0 {
            return 0.0;
        }
        let far = 2.0 * half - near;
        if t == 0.0 {
            w * f(half, half)
        } else {
            w * (f(far, near) + f(near, far))
        }
    };

    let mut h = 1.0;
    let mut sum = pair(0.0);
    let mut k = 1.0;
    while k * h <= T_MAX {
        sum += pair(k * h);
        k += 1.0;
    }
    let mut estimate = half * h * sum;

    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        let mut t = h;
        while t <= T_MAX {
            sum += pair(t);
            t += 2.0 * h;
        }
        let next = half * h * sum;
        let done = (next - estimate).abs() <= rel_tol * next.abs().max(f64::MIN_POSITIVE);
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// Mass of `dist` on `[lo, hi]`: the density integrated piece by piece
/// between breakpoints, plus the atoms in the window. Uses only `density`
/// and `atoms`, never the CDF.
pub fn mass_by_quadrature(dist: &RewardDistribution, lo: f64, hi: f64) -> f64 {
    let mut pts: Vec<f64> = dist
        .breakpoints()
        .into_iter()
        .filter(|&x| x > lo && x < hi)
        .collect();
    pts.insert(0, lo.max(dist.support_lo()));
    pts.push(hi.min(dist.max_reward()));
    let continuous: f64 = pts
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            tanh_sinh(
                |l, r| {
                    if l <= r {
                        dist.density_offset(a, l)
                    } else {
                        dist.density_offset(b, -r)
                    }
                },
                a,
                b,
                1e-13,
            )
        })
        .sum();
    let atoms: f64 = dist
        .atoms()
        .into_iter()
        .filter(|&(x, _)| x >= lo && x <= hi)
        .map(|(_, m)| m)
        .sum();
    continuous + atoms
}

/// Total mass of `dist` by quadrature.
pub fn total_mass_by_quadrature(dist: &RewardDistribution) -> f64 {
    mass_by_quadrature(dist, dist.support_lo(), dist.max_reward())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial() {
        let v = tanh_sinh(|l, _| (l + 1.0).powi(3), 1.0, 3.0, 1e-14);
        assert_abs_diff_eq!(v, 20.0, epsilon = 1e-12);
    }

    #[test]
    fn right_endpoint_singularity() {
        // ∫_0^1 0.25·(1−x)^(−0.75) dx = 1
        let v = tanh_sinh(|_, r| 0.25 * r.powf(-0.75), 0.0, 1.0, 1e-14);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn both_endpoints_singular() {
        // ∫_0^1 x^(−1/2)(1−x)^(−1/2) dx = π
        let v = tanh_sinh(|l, r| 1.0 / (l * r).sqrt(), 0.0, 1.0, 1e-14);
        assert_abs_diff_eq!(v, std::f64::consts::PI, epsilon = 1e-9);
    }

    #[test]
    fn distributions_integrate_to_one() {
        let cases = [
            RewardDistribution::power_tail(1.0, 1.0, 1.0).unwrap(),
            RewardDistribution::power_tail(2.0, 2.5, 0.25).unwrap(),
            RewardDistribution::uniform(-3.0, 0.5).unwrap(),
            RewardDistribution::point_mass(0.4).unwrap(),
            RewardDistribution::mixture(vec![
                (0.3, RewardDistribution::point_mass(0.2).unwrap()),
                (0.7, RewardDistribution::power_tail(0.9, 0.3, 0.5).unwrap()),
            ])
            .unwrap(),
        ];
        for d in &cases {
            assert_abs_diff_eq!(total_mass_by_quadrature(d), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn partial_window_matches_closed_form() {
        let d = RewardDistribution::power_tail(1.0, 0.25, 0.5).unwrap();
        assert_abs_diff_eq!(mass_by_quadrature(&d, 0.96, 1.0), 0.05, epsilon = 1e-10);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(tanh_sinh(|_, _| 1.0, 2.0, 2.0, 1e-12), 0.0);
    }
}
