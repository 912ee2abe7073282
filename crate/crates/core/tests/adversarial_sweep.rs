use maxbandit::adversarial::{
    adversarial_report, build_hypothesis_multi, build_hypothesis_unified, verify_unified,
    ConstructionCase,
};
use maxbandit::algorithms::PacParams;
use maxbandit::bandit_env::BanditInstance;
use maxbandit::reward_models::{check_assumption1, RewardDistribution, TailParams};
use proptest::prelude::*;

#[derive(Debug, Clone, Copy)]
enum Kind {
    Point,
    Tight,
    Loose(f64),
    Uniform(f64),
}

fn build(kind: Kind, m: f64, tail: &TailParams) -> RewardDistribution {
    let (a, beta) = (tail.a(), tail.beta());
    match kind {
        Kind::Point => RewardDistribution::point_mass(m),
        Kind::Tight => RewardDistribution::power_tail(m, a, beta),
        Kind::Loose(s) => RewardDistribution::power_tail(m, a * s, beta),
        Kind::Uniform(w) if beta == 1.0 => RewardDistribution::uniform(m - w / a, m),
        Kind::Uniform(_) => RewardDistribution::power_tail(m, a, beta),
    }
    .unwrap()
}

fn kinds() -> impl Strategy<Value = Kind> {
    prop_oneof![
        Just(Kind::Point),
        Just(Kind::Tight),
        (1.0f64..4.0).prop_map(Kind::Loose),
        (0.1f64..=1.0).prop_map(Kind::Uniform),
    ]
}

fn cases() -> impl Strategy<Value = (BanditInstance, PacParams)> {
    (
        prop_oneof![Just(1.0), 0.15f64..1.0],
        0.05f64..3.0,
        0.05f64..=1.0,
        0.01f64..0.99,
        1e-6f64..0.18,
        prop::collection::vec((0.0f64..1.0, kinds()), 1..8),
    )
        .prop_map(|(beta, a, f0, fe, delta, arms)| {
            let eps0 = f0 * (4.0 * a).powf(-1.0 / beta);
            let tail = TailParams::new(a, beta, eps0).unwrap();
            let dists = arms
                .iter()
                .map(|&(u, kind)| build(kind, 1.0 - u, &tail))
                .collect();
            (
                BanditInstance::new(dists, tail).unwrap(),
                PacParams::new(fe * eps0, delta).unwrap(),
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn every_arm_hypothesis_passes((inst, pac) in cases()) {
        let report = adversarial_report(&inst, &pac).unwrap();
        for arm in &report.arms {
            prop_assert!(arm.checks.passed, "arm {}: {:?}", arm.arm, arm.checks);
        }
        prop_assert!(report.t_order);
    }

    #[test]
    fn hypothesis_moves_maximum_to_target((inst, pac) in cases()) {
        for k in 0..inst.len() {
            let h = build_hypothesis_multi(&inst, k, &pac).unwrap();
            prop_assert_eq!(h.perturbed.max_reward(), inst.mu_star() + pac.eps());
            prop_assert!(h.gamma_k < 1.0 && h.gamma_k > 0.0);
            if h.case == ConstructionCase::Far {
                prop_assert!(h.gamma2.is_none() && h.mu_bar.is_none());
            }
        }
    }
}

#[test]
fn unified_hypothesis_passes_with_slack_at_the_top() {
    let tail = TailParams::new(1.0, 1.0, 0.25).unwrap();
    let arms = vec![
        RewardDistribution::point_mass(1.0).unwrap(),
        RewardDistribution::uniform(0.0, 0.5).unwrap(),
    ];
    let inst = BanditInstance::new(arms, tail).unwrap();
    let pac = PacParams::new(0.1, 0.05).unwrap();
    let h = build_hypothesis_unified(&inst, &pac).unwrap();
    let checks = verify_unified(&h, &pac);
    assert!(checks.passed, "{checks:?}");
}

#[test]
fn unified_hypothesis_misses_envelope_for_tight_linear_tail() {
    // Scaling the base by γ < 1 leaves too little mass just below the old
    // maximum: at depth 0.2 the law holds 0.1 + 0.9·0.1 = 0.19 < 0.2.
    let tail = TailParams::new(1.0, 1.0, 0.25).unwrap();
    let inst =
        BanditInstance::new(vec![RewardDistribution::uniform(0.0, 1.0).unwrap()], tail).unwrap();
    let pac = PacParams::new(0.1, 0.05).unwrap();
    let h = build_hypothesis_unified(&inst, &pac).unwrap();
    assert!((h.perturbed.tail_mass(0.2) - 0.19).abs() < 1e-12);
    let grid = check_assumption1(&h.perturbed, &h.tail, 64);
    assert!(!grid.passed);
    let checks = verify_unified(&h, &pac);
    assert!(
        checks.normalization && checks.new_maximum && checks.gamma_bracket && !checks.assumption
    );
}
