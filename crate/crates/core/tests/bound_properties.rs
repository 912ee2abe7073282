use maxbandit::algorithms::{compute_l, PacParams};
use maxbandit::bandit_env::BanditInstance;
use maxbandit::bounds::{theta_terms, BoundReport};
use maxbandit::reward_models::{RewardDistribution, TailParams};
use proptest::prelude::*;

#[derive(Debug)]
struct Case {
    inst: BanditInstance,
    pac: PacParams,
}

/// Valid instances for the multi-arm bounds: `β ≤ 1`, `4A·ε₀^β ≤ 1`,
/// `ε < ε₀`, `δ < 3/16`. The second arm always sits within `ε` of the best.
fn cases() -> impl Strategy<Value = Case> {
    (
        0.1f64..=1.0,
        0.05f64..3.0,
        0.05f64..=1.0,
        0.01f64..0.99,
        1e-6f64..0.18,
        0.0f64..=1.0,
        prop::collection::vec((0.0f64..1.0, any::<bool>()), 0..8),
    )
        .prop_map(|(beta, a, f0, fe, delta, near, rest)| {
            let eps0 = f0 * (4.0 * a).powf(-1.0 / beta);
            let eps = fe * eps0;
            let tail = TailParams::new(a, beta, eps0).unwrap();
            let top = 2.0;
            let mut maxima = vec![top, top - near * eps];
            maxima.extend(rest.iter().map(|&(u, _)| top - 2.0 * u));
            let arms = maxima
                .iter()
                .zip(
                    std::iter::once(true)
                        .chain(std::iter::once(false))
                        .chain(rest.iter().map(|r| r.1)),
                )
                .map(|(&m, point)| {
                    if point {
                        RewardDistribution::point_mass(m).unwrap()
                    } else {
                        RewardDistribution::power_tail(m, a, beta).unwrap()
                    }
                })
                .collect();
            Case {
                inst: BanditInstance::new(arms, tail).unwrap(),
                pac: PacParams::new(eps, delta).unwrap(),
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn theta_dominance(c in cases()) {
        let (t1, t2) = theta_terms(&c.inst, &c.pac);
        for (a, b) in t1.iter().zip(&t2) {
            prop_assert!(a * (1.0 + 1e-12) >= *b, "{a} < {b}");
        }
    }

    #[test]
    fn lower_bounds_sit_below_upper_bounds(c in cases()) {
        let r = BoundReport::evaluate(&c.inst, &c.pac);
        prop_assert!(r.thm1_lower <= r.thm2_total);
        prop_assert!(r.thm3_lower <= r.thm4_upper);
        prop_assert!(r.thm2_init > 0.0 && r.thm2_core > 0.0);
    }

    #[test]
    fn near_optimal_arm_theta_within_factor(c in cases()) {
        let (t1, _) = theta_terms(&c.inst, &c.pac);
        let best = c.inst.best_arm();
        let factor = 2f64.powf(-c.inst.tail().beta());
        for (k, gap) in c.inst.gaps().iter().enumerate() {
            if *gap <= c.pac.eps() {
                prop_assert!(t1[k] >= factor * t1[best] * (1.0 - 1e-12));
            }
        }
    }

    /// With two arms within `ε` of the best, the multi-arm upper and lower
    /// bounds differ by at most `[8(1+2^β)²(L − ln δ) + 4] / ln(3/(16δ))`.
    #[test]
    fn bounds_tight_up_to_log_factor(c in cases()) {
        let r = BoundReport::evaluate(&c.inst, &c.pac);
        let beta = c.inst.tail().beta();
        let l = compute_l(c.inst.len(), c.inst.tail(), &c.pac, true);
        let s = (1.0 + 2f64.powf(beta)).powi(2);
        let factor = (8.0 * s * (l + c.pac.log_inv_delta()) + 4.0) / (3.0 / (16.0 * c.pac.delta())).ln();
        prop_assert!(r.thm2_total <= factor * r.thm1_lower * (1.0 + 1e-12),
            "ratio {} above {factor}", r.thm2_total / r.thm1_lower);
    }
}

#[test]
fn tighter_log_factor_fails_on_twin_optimum() {
    // Two arms at the top: the ratio exceeds 8(1+2^β)(L − ln δ)/ln(1/δ).
    let tail = TailParams::new(1.0, 1.0, 0.25).unwrap();
    let arms = vec![RewardDistribution::point_mass(1.0).unwrap(); 2];
    let inst = BanditInstance::new(arms, tail).unwrap();
    let pac = PacParams::new(0.1, 0.01).unwrap();
    let r = BoundReport::evaluate(&inst, &pac);
    let l = compute_l(2, &tail, &pac, true);
    let naive = 8.0 * 3.0 * (l + pac.log_inv_delta()) / pac.log_inv_delta();
    assert!(r.thm2_total / r.thm1_lower > naive);
}
