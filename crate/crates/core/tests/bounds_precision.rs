//! Bound evaluations against a 200-bit re-evaluation (tests/oracle/bounds_mp.py).

#![allow(clippy::excessive_precision)]

use maxbandit::algorithms::{compute_l, unified_sample_count, PacParams};
use maxbandit::bandit_env::BanditInstance;
use maxbandit::bounds::BoundReport;
use maxbandit::reward_models::{RewardDistribution, TailParams};

struct Case {
    maxima: Vec<f64>,
    a: f64,
    beta: f64,
    eps0: f64,
    eps: f64,
    delta: f64,
    // L, thm1, core, init, thm3, thm4
    expected: [f64; 6],
    n: u64,
}

fn cases() -> Vec<(&'static str, Case)> {
    let mut ex1 = vec![0.9];
    ex1.extend(std::iter::repeat_n(0.1, 9999));
    let mut ex2 = vec![0.1];
    ex2.extend(std::iter::repeat_n(0.9, 9999));
    vec![
        (
            "example1",
            Case {
                maxima: ex1,
                a: 0.01,
                beta: 1.0,
                eps0: 25.0,
                eps: 1e-4,
                delta: 1e-3,
                expected: [
                    149.75097485172803492,
                    817593.96755498132409,
                    352462560.45283154818,
                    6270000.0,
                    15992324138.040365922,
                    69077552791.821370521,
                ],
                n: 69_077_552_791,
            },
        ),
        (
            "example2",
            Case {
                maxima: ex2,
                a: 0.01,
                beta: 1.0,
                eps0: 25.0,
                eps: 1e-4,
                delta: 1e-3,
                expected: [
                    149.75097485172803492,
                    6540915193.8193027787,
                    1566430662159.3122759,
                    6270000.0,
                    15992324138.040365922,
                    69077552791.821370521,
                ],
                n: 69_077_552_791,
            },
        ),
        (
            "three_uniform",
            Case {
                maxima: vec![1.0, 0.5, 0.5],
                a: 1.0,
                beta: 1.0,
                eps0: 0.5,
                eps: 0.05,
                delta: 0.1,
                expected: [
                    29.699155952099528974,
                    0.31430432971118706887,
                    768.0417850822457918,
                    195.0,
                    26.876392038420825012,
                    140.15510557964274104,
                ],
                n: 140,
            },
        ),
        (
            "half_beta",
            Case {
                maxima: vec![0.7, 0.69, 0.4, 0.2],
                a: 0.3,
                beta: 0.5,
                eps0: 0.6,
                eps: 0.02,
                delta: 0.01,
                expected: [
                    36.495773354336367865,
                    10.90406535100325337,
                    2381.4011421030263124,
                    708.0,
                    96.504626815383788814,
                    436.1796089373724919,
                ],
                n: 436,
            },
        ),
        (
            "quarter_beta",
            Case {
                maxima: vec![2.0, 1.999, 1.5],
                a: 2.5,
                beta: 0.25,
                eps0: 0.001,
                eps: 0.0004,
                delta: 0.001,
                expected: [
                    24.725358777705434508,
                    2.9431701316813363316,
                    175.67371667462789025,
                    216.0,
                    13.569937013929981527,
                    60.614247206545286406,
                ],
                n: 60,
            },
        ),
    ]
}

fn rel(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

#[test]
fn bounds_agree_with_high_precision_reference() {
    for (name, c) in cases() {
        let tail = TailParams::new(c.a, c.beta, c.eps0).unwrap();
        let arms = c
            .maxima
            .iter()
            .map(|&m| RewardDistribution::point_mass(m).unwrap())
            .collect();
        let inst = BanditInstance::new(arms, tail).unwrap();
        let pac = PacParams::new(c.eps, c.delta).unwrap();
        let r = BoundReport::evaluate(&inst, &pac);
        let got = [
            compute_l(inst.len(), &tail, &pac, true),
            r.thm1_lower,
            r.thm2_core,
            r.thm2_init,
            r.thm3_lower,
            r.thm4_upper,
        ];
        let labels = ["L", "thm1", "core", "init", "thm3", "thm4"];
        for ((label, g), w) in labels.iter().zip(got).zip(c.expected) {
            assert!(
                rel(g, w) < 1e-10,
                "{name} {label}: got {g}, want {w}, rel {}",
                rel(g, w)
            );
        }
        assert_eq!(
            unified_sample_count(inst.len(), &tail, &pac).unwrap(),
            c.n,
            "{name} n"
        );
    }
}
