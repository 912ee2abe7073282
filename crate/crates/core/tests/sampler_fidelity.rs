use maxbandit::adversarial::{build_hypothesis_multi, build_hypothesis_unified};
use maxbandit::algorithms::PacParams;
use maxbandit::bandit_env::BanditInstance;
use maxbandit::reward_models::{RewardDistribution, TailParams};
use maxbandit::stats::{ks_critical_999, ks_statistic};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 100_000;

fn assert_ks(dist: &RewardDistribution, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<f64> = (0..N).map(|_| dist.sample(&mut rng)).collect();
    let d = ks_statistic(&mut xs, |x| dist.cdf(x));
    assert!(d < ks_critical_999(N), "{} D = {d}", dist.kind());
}

fn two_arm(base: RewardDistribution) -> BanditInstance {
    let tail = TailParams::new(1.0, 1.0, 0.25).unwrap();
    BanditInstance::new(
        vec![RewardDistribution::uniform(0.0, 1.0).unwrap(), base],
        tail,
    )
    .unwrap()
}

#[test]
fn continuous_laws() {
    assert_ks(&RewardDistribution::power_tail(1.0, 1.0, 0.5).unwrap(), 1);
    assert_ks(&RewardDistribution::power_tail(0.3, 4.0, 0.2).unwrap(), 2);
    assert_ks(&RewardDistribution::uniform(-2.0, 5.0).unwrap(), 3);
}

#[test]
fn continuous_mixture() {
    let m = RewardDistribution::mixture(vec![
        (0.3, RewardDistribution::uniform(0.0, 0.4).unwrap()),
        (0.7, RewardDistribution::power_tail(1.0, 1.0, 0.7).unwrap()),
    ])
    .unwrap();
    assert_ks(&m, 4);
}

#[test]
fn perturbed_far_and_near() {
    let pac = PacParams::new(0.05, 0.01).unwrap();
    let far = build_hypothesis_multi(
        &two_arm(RewardDistribution::uniform(0.0, 0.3).unwrap()),
        1,
        &pac,
    )
    .unwrap();
    assert_ks(&far.perturbed, 5);
    let near = build_hypothesis_multi(
        &two_arm(RewardDistribution::power_tail(0.95, 1.0, 1.0).unwrap()),
        1,
        &pac,
    )
    .unwrap();
    assert_ks(&near.perturbed, 6);
}

#[test]
fn perturbed_unified() {
    let inst = two_arm(RewardDistribution::uniform(0.2, 0.9).unwrap());
    let h = build_hypothesis_unified(&inst, &PacParams::new(0.1, 0.05).unwrap()).unwrap();
    assert_ks(&h.perturbed, 7);
}

#[test]
fn point_mass_atom_reweighted() {
    // Near case on a point mass: the atom keeps γ³ of its mass.
    let inst = two_arm(RewardDistribution::point_mass(0.97).unwrap());
    let h = build_hypothesis_multi(&inst, 1, &PacParams::new(0.05, 0.01).unwrap()).unwrap();
    let g3 = h.gamma3.expect("atom present");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let hits = (0..N)
        .filter(|_| h.perturbed.sample(&mut rng) == 0.97)
        .count() as f64
        / N as f64;
    let sd = (g3 * (1.0 - g3) / N as f64).sqrt();
    assert!((hits - g3).abs() < 4.0 * sd, "{hits} vs {g3}");
}

proptest! {
    // F is steep near the maximum for small β, so the inverse is checked
    // as a sandwich a few ulps wide rather than by F(q) = u
    #[test]
    fn quantile_is_monotone_and_inverts_cdf(u in 1e-12f64..=1.0, v in 1e-12f64..=1.0, beta in 0.1f64..=1.0) {
        let d = RewardDistribution::power_tail(1.0, 1.0, beta).unwrap();
        let (qu, qv) = (d.quantile(u).unwrap(), d.quantile(v).unwrap());
        prop_assert_eq!(u <= v, qu <= qv || (u - v).abs() < 1e-15);
        let ulp = 4.0 * f64::EPSILON * qu.abs().max(1.0);
        prop_assert!(d.cdf(qu + ulp) >= u && d.cdf(qu - ulp) <= u);
        prop_assert!(d.quantile(0.0).is_err());
    }
}
