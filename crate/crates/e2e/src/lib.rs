//! Instance fixtures shared by the end-to-end checks.

use maxbandit::algorithms::PacParams;
use maxbandit::bandit_env::BanditInstance;
use maxbandit::reward_models::{RewardDistribution, TailParams};
use rand::Rng;

/// A random instance with `β ≤ 1` and `4A·ε₀^β ≤ 1`, plus PAC parameters
/// with `ε < ε₀` and `δ < 3/16`.
///
/// Arm maxima are spread over `[0, 1]`, with some arms placed within `ε`
/// of the best. Arms are tight or loose power tails, point masses, and (at
/// `β = 1`) uniforms no wider than `1/A`.
pub fn random_valid_instance<R: Rng>(rng: &mut R) -> (BanditInstance, PacParams) {
    let beta: f64 = if rng.random_bool(0.3) {
        1.0
    } else {
        rng.random_range(0.2..1.0)
    };
    let a: f64 = rng.random_range(0.1..2.0);
    let eps0 = rng.random_range(0.2..1.0) * (4.0 * a).powf(-1.0 / beta);
    let eps = rng.random_range(0.05..0.95) * eps0;
    let delta = rng.random_range(0.001..0.15);
    let tail = TailParams::new(a, beta, eps0).unwrap();

    let k_size = rng.random_range(1..=8);
    let top: f64 = rng.random_range(0.5..1.0);
    let arms = (0..k_size)
        .map(|i| {
            let m = match (i, rng.random_range(0..3)) {
                (0, _) => top,
                (_, 0) => top - rng.random_range(0.0..=1.0) * eps,
                _ => rng.random_range(0.0..top),
            };
            match rng.random_range(0..4) {
                0 => RewardDistribution::point_mass(m).unwrap(),
                1 if beta == 1.0 => {
                    let w = rng.random_range(0.2..=1.0) / a;
                    RewardDistribution::uniform(m - w, m).unwrap()
                }
                2 => {
                    RewardDistribution::power_tail(m, a * rng.random_range(1.0..3.0), beta).unwrap()
                }
                _ => RewardDistribution::power_tail(m, a, beta).unwrap(),
            }
        })
        .collect();
    let inst = BanditInstance::new(arms, tail).expect("generated arms satisfy the envelope");
    (inst, PacParams::new(eps, delta).unwrap())
}

pub fn three_uniform() -> BanditInstance {
    let arms = vec![
        RewardDistribution::uniform(0.0, 1.0).unwrap(),
        RewardDistribution::uniform(0.0, 0.5).unwrap(),
        RewardDistribution::uniform(0.0, 0.5).unwrap(),
    ];
    BanditInstance::new(arms, TailParams::new(1.0, 1.0, 0.5).unwrap()).unwrap()
}
