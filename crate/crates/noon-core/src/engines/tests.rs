use super::*;
use crate::circuit::{standard_config, Angle, CircuitConfig, Transmission};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn outcome56(m1: u32, m2: u32, m5: u32, m6: u32) -> DetectionOutcome {
    DetectionOutcome::new(
        DetectorSet::Side56,
        &[
            (Detector::D1, m1),
            (Detector::D2, m2),
            (Detector::D5, m5),
            (Detector::D6, m6),
        ],
    )
    .unwrap()
}

fn outcome789(m1: u32, m2: u32, m7: u32, m8: u32, m9: u32) -> DetectionOutcome {
    DetectionOutcome::new(
        DetectorSet::Output789,
        &[
            (Detector::D1, m1),
            (Detector::D2, m2),
            (Detector::D7, m7),
            (Detector::D8, m8),
            (Detector::D9, m9),
        ],
    )
    .unwrap()
}

fn random_config(rng: &mut impl Rng, n_alpha: u32, n_beta: u32) -> CircuitConfig {
    CircuitConfig {
        n_alpha,
        n_beta,
        theta: Angle::Radians(rng.gen_range(-3.1..3.1)),
        xi: Angle::Radians(rng.gen_range(-3.1..3.1)),
        zeta: Angle::Radians(rng.gen_range(-3.1..3.1)),
        transmission: Transmission::Value(rng.gen_range(0.0..1.0)),
        probe: None,
    }
}

#[test]
fn hong_ou_mandel_cancellation() {
    // Two single-particle sources, 50-50 splitter: the (1,1) coincidence
    // vanishes.
    let cfg = CircuitConfig::uncorrected(1, 1);
    let outcome = outcome56(0, 0, 1, 1);
    let amp = amplitude_sum(&cfg, &outcome).unwrap();
    let exact = amp.exact_probability().expect("exact config");
    assert!(exact.is_zero(), "HOM probability must vanish exactly");
    let (p_int, _) = amplitude_integral(&cfg, &outcome).unwrap().probability();
    assert!(p_int < 1e-25);
    assert_eq!(statevector_oracle(&cfg, &outcome).unwrap(), 0.0);
}

#[test]
fn non_conserving_outcome_is_rejected() {
    let cfg = CircuitConfig::uncorrected(1, 1);
    let bad = outcome56(1, 1, 1, 1);
    assert!(matches!(
        amplitude_sum(&cfg, &bad),
        Err(EngineError::NonConserving {
            expected: 2,
            got: 4
        })
    ));
    assert!(matches!(
        amplitude_integral(&cfg, &bad),
        Err(EngineError::NonConserving { .. })
    ));
}

#[test]
fn oracle_cost_guard() {
    let cfg = CircuitConfig::uncorrected(10, 10);
    let outcome = outcome56(0, 0, 10, 10);
    assert!(matches!(
        statevector_oracle(&cfg, &outcome),
        Err(EngineError::CostGuard { total: 20, max: 12 })
    ));
}

#[test]
fn oracle_conservation_single_source() {
    // N_α = 2, N_β = 0: all probability mass on outcomes with total 2.
    let cfg = CircuitConfig::uncorrected(2, 0);
    let joint = oracle::oracle_joint(&cfg, DetectorSet::Side56).unwrap();
    let total: f64 = joint.values().sum();
    assert!((total - 1.0).abs() < 1e-12);
    for key in joint.keys() {
        assert_eq!(key.iter().sum::<u32>(), 2);
    }
}

#[test]
fn engines_match_oracle_exhaustively_small_n() {
    // Randomized phases, every conserving outcome, all three engines.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..12 {
        let n_alpha = rng.gen_range(0..=4);
        let n_beta = rng.gen_range(0..=4u32.min(8 - n_alpha));
        let cfg = random_config(&mut rng, n_alpha, n_beta);
        for set in [
            DetectorSet::Side56,
            DetectorSet::Feedforward569,
            DetectorSet::Output789,
        ] {
            let joint = oracle::oracle_joint(&cfg, set).unwrap();
            for counts in enumerate_outcomes(set, cfg.total()) {
                let outcome = DetectionOutcome::from_counts(set, counts.clone()).unwrap();
                let oracle_p = joint.get(&counts).copied().unwrap_or(0.0);
                let (sum_p, _) = amplitude_sum_float(&cfg, &outcome).unwrap().probability();
                let (int_p, _) = amplitude_integral(&cfg, &outcome).unwrap().probability();
                assert!(
                    (sum_p - oracle_p).abs() < 1e-12,
                    "case {case} {set:?} {counts:?}: sum {sum_p} vs oracle {oracle_p}"
                );
                assert!(
                    (int_p - oracle_p).abs() < 1e-12,
                    "case {case} {set:?} {counts:?}: integral {int_p} vs oracle {oracle_p}"
                );
            }
        }
    }
}

#[test]
fn exact_engine_matches_oracle_on_standard_configs() {
    // Both ξ branches: m1 >= m2 and the swapped m2 > m1 cases.
    for (m1, m2) in [(1u32, 1u32), (2, 1), (3, 0), (1, 2), (0, 3)] {
        let cfg = standard_config(3, 3, m1, m2);
        let set = DetectorSet::Output789;
        let joint = oracle::oracle_joint(&cfg, set).unwrap();
        for counts in enumerate_outcomes(set, cfg.total()) {
            let outcome = DetectionOutcome::from_counts(set, counts.clone()).unwrap();
            let amp = amplitude_sum_exact(&cfg, &outcome).unwrap();
            let exact_p = amp.exact_probability().unwrap().to_f64();
            let oracle_p = joint.get(&counts).copied().unwrap_or(0.0);
            assert!(
                (exact_p - oracle_p).abs() < 1e-13,
                "(m1,m2)=({m1},{m2}) {counts:?}: exact {exact_p} vs oracle {oracle_p}"
            );
        }
    }
}

#[test]
fn exact_probabilities_are_rational_for_standard_configs() {
    let cfg = standard_config(5, 5, 3, 2);
    for set in [
        DetectorSet::Side56,
        DetectorSet::Feedforward569,
        DetectorSet::Output789,
    ] {
        for counts in enumerate_outcomes(set, cfg.total()) {
            let outcome = DetectionOutcome::from_counts(set, counts.clone()).unwrap();
            let amp = amplitude_sum_exact(&cfg, &outcome).unwrap();
            let p = amp.exact_probability().unwrap();
            assert!(
                p.is_rational(),
                "{set:?} {counts:?}: radical part {:?}",
                p.radical_coeff
            );
        }
    }
}

#[test]
fn unitarity_exact_small_n() {
    use crate::numerics::ExactRational;
    use num_traits::One;
    for (n_alpha, n_beta, m1, m2) in [(3u32, 3u32, 2u32, 1u32), (4, 2, 1, 1), (2, 4, 1, 3)] {
        let cfg = standard_config(n_alpha, n_beta, m1, m2);
        for set in [
            DetectorSet::Side56,
            DetectorSet::Feedforward569,
            DetectorSet::Output789,
        ] {
            let mut total = ExactReal::zero();
            for counts in enumerate_outcomes(set, cfg.total()) {
                let outcome = DetectionOutcome::from_counts(set, counts).unwrap();
                let amp = amplitude_sum_exact(&cfg, &outcome).unwrap();
                total.add_assign(amp.exact_probability().unwrap());
            }
            assert!(total.is_rational(), "{set:?}: unexpected radical remainder");
            assert!(
                total.rational == ExactRational::one(),
                "{set:?}: Σ|C|² = {:?}",
                total.rational
            );
        }
    }
}

#[test]
fn unitarity_float_random_configs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..4 {
        let n_alpha = rng.gen_range(1..=5);
        let n_beta = rng.gen_range(1..=5);
        let cfg = random_config(&mut rng, n_alpha, n_beta);
        for set in [DetectorSet::Side56, DetectorSet::Output789] {
            let mut total = 0.0;
            for counts in enumerate_outcomes(set, cfg.total()) {
                let outcome = DetectionOutcome::from_counts(set, counts).unwrap();
                total += amplitude_sum_float(&cfg, &outcome).unwrap().probability().0;
            }
            assert!((total - 1.0).abs() < 1e-12, "{set:?}: Σ = {total}");
        }
    }
}

#[test]
fn sum_and_integral_agree_on_moderate_n() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..6 {
        let n_alpha = rng.gen_range(5..=20);
        let n_beta = rng.gen_range(5..=20);
        let cfg = random_config(&mut rng, n_alpha, n_beta);
        let n = cfg.total();
        for _ in 0..10 {
            // Random conserving outcome of the corrected set.
            let mut cuts: Vec<u32> = (0..4).map(|_| rng.gen_range(0..=n)).collect();
            cuts.sort_unstable();
            let counts = vec![
                cuts[0],
                cuts[1] - cuts[0],
                cuts[2] - cuts[1],
                cuts[3] - cuts[2],
                n - cuts[3],
            ];
            let outcome = DetectionOutcome::from_counts(DetectorSet::Output789, counts).unwrap();
            let a = amplitude_sum_float(&cfg, &outcome).unwrap().probability().0;
            let b = amplitude_integral(&cfg, &outcome).unwrap().probability().0;
            if a > 1e-30 && b > 1e-30 {
                assert!((a - b).abs() / a.max(b) < 1e-10, "sum {a} vs integral {b}");
            }
        }
    }
}

#[test]
fn symmetric_exchange_of_m7_m8() {
    // For the standard corrected configuration the probability is symmetric
    // in exchange of m7 and m8.
    let cfg = standard_config(6, 6, 3, 1);
    let total = cfg.total();
    let m9 = 2;
    let m78 = total - 3 - 1 - m9;
    for m7 in 0..=m78 {
        let a = amplitude_sum_exact(&cfg, &outcome789(3, 1, m7, m78 - m7, m9))
            .unwrap()
            .exact_probability()
            .unwrap()
            .clone();
        let b = amplitude_sum_exact(&cfg, &outcome789(3, 1, m78 - m7, m7, m9))
            .unwrap()
            .exact_probability()
            .unwrap()
            .clone();
        assert_eq!(a, b, "m7 = {m7}");
    }
}

#[test]
fn conditional_distribution_basics() {
    let cfg = standard_config(6, 6, 3, 1);
    let dist = conditional_distribution(
        &cfg,
        DetectorSet::Output789,
        &[(Detector::D1, 3), (Detector::D2, 1), (Detector::D9, 2)],
        Detector::D7,
        EngineKind::Exact,
    )
    .unwrap();
    assert_eq!(dist.pair_total, 6);
    assert_eq!(dist.probabilities.len(), 7);
    let sum: f64 = dist.probabilities.iter().sum();
    assert!((sum - 1.0).abs() < 1e-12);
    assert!(dist.total_absolute > 0.0);
    // Conditioning consumes everything: distribution concentrates on zero.
    let all = conditional_distribution(
        &cfg,
        DetectorSet::Output789,
        &[(Detector::D1, 6), (Detector::D2, 6), (Detector::D9, 0)],
        Detector::D7,
        EngineKind::Exact,
    )
    .unwrap();
    assert_eq!(all.pair_total, 0);
    assert_eq!(all.probabilities.len(), 1);
    // Over-conditioning is an error.
    assert!(matches!(
        conditional_distribution(
            &cfg,
            DetectorSet::Output789,
            &[(Detector::D1, 9), (Detector::D2, 6), (Detector::D9, 0)],
            Detector::D7,
            EngineKind::Exact,
        ),
        Err(EngineError::EmptySupport)
    ));
}

#[test]
fn summed_distribution_matches_direct_marginal() {
    let cfg = standard_config(4, 4, 2, 1);
    let dist = summed_distribution(
        &cfg,
        DetectorSet::Feedforward569,
        &[(Detector::D1, 2), (Detector::D2, 1)],
        Detector::D9,
        Detector::D5Prime,
        EngineKind::Exact,
    )
    .unwrap();
    // Direct: P(m9) = Σ_{m5'} |C|²
    for m9 in dist.support() {
        let mut direct = 0.0;
        for m5p in 0..=(dist.pair_total - m9) {
            let outcome = DetectionOutcome::new(
                DetectorSet::Feedforward569,
                &[
                    (Detector::D1, 2),
                    (Detector::D2, 1),
                    (Detector::D5Prime, m5p),
                    (Detector::D6, dist.pair_total - m9 - m5p),
                    (Detector::D9, m9),
                ],
            )
            .unwrap();
            direct += amplitude_sum(&cfg, &outcome).unwrap().probability().0;
        }
        assert!((dist.absolute[m9 as usize] - direct).abs() < 1e-14);
    }
}

#[test]
fn probe_set_requires_probe_stage() {
    let cfg = standard_config(2, 2, 1, 1);
    let outcome = DetectionOutcome::new(
        DetectorSet::Probe789,
        &[
            (Detector::D1, 1),
            (Detector::D2, 1),
            (Detector::P7, 1),
            (Detector::P8, 1),
            (Detector::D9, 0),
        ],
    )
    .unwrap();
    assert!(matches!(
        amplitude_sum(&cfg, &outcome),
        Err(EngineError::MissingProbe)
    ));
}

#[test]
fn probe_set_agrees_with_oracle() {
    use crate::circuit::ProbeArm;
    let mut rng = ChaCha8Rng::seed_from_u64(three_seed());
    for _ in 0..4 {
        let mut cfg = random_config(&mut rng, 3, 2);
        cfg = cfg.with_probe(
            if rng.gen_bool(0.5) {
                ProbeArm::Arm7
            } else {
                ProbeArm::Arm8
            },
            Angle::Radians(rng.gen_range(-3.0..3.0)),
        );
        let set = DetectorSet::Probe789;
        let joint = oracle::oracle_joint(&cfg, set).unwrap();
        for counts in enumerate_outcomes(set, cfg.total()) {
            let outcome = DetectionOutcome::from_counts(set, counts.clone()).unwrap();
            let (p, _) = amplitude_sum_float(&cfg, &outcome).unwrap().probability();
            let (pi, _) = amplitude_integral(&cfg, &outcome).unwrap().probability();
            let po = joint.get(&counts).copied().unwrap_or(0.0);
            assert!((p - po).abs() < 1e-12, "{counts:?}: {p} vs {po}");
            assert!((pi - po).abs() < 1e-12, "{counts:?}: {pi} vs {po}");
        }
    }
}

fn three_seed() -> u64 {
    3
}

#[test]
fn exact_unavailable_for_generic_angles() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = random_config(&mut rng, 2, 2);
    let outcome = outcome56(1, 1, 1, 1);
    assert!(matches!(
        amplitude_sum_exact(&cfg, &outcome),
        Err(EngineError::ExactUnavailable)
    ));
    // The auto path falls back to float.
    let amp = amplitude_sum(&cfg, &outcome).unwrap();
    assert!(amp.exact_probability().is_none());
}

#[test]
fn merged_and_generic_enumeration_agree() {
    // ξ = -π/2 merges {1,5} and {2,6}; breaking the merge with a generic θ
    // must not change any probability.
    let cfg = standard_config(5, 3, 2, 1);
    let mut unmergeable = cfg;
    unmergeable.theta = Angle::Radians(std::f64::consts::FRAC_PI_2);
    for counts in enumerate_outcomes(DetectorSet::Side56, cfg.total()) {
        let outcome = DetectionOutcome::from_counts(DetectorSet::Side56, counts).unwrap();
        let merged = amplitude_sum_float(&cfg, &outcome).unwrap().probability().0;
        let generic = amplitude_sum_float(&unmergeable, &outcome)
            .unwrap()
            .probability()
            .0;
        assert!(
            (merged - generic).abs() <= 1e-12 * merged.max(generic).max(1e-300),
            "{merged} vs {generic}"
        );
    }
}

#[test]
fn integral_engine_matches_exact_at_small_n_relative() {
    // The corrected-config integrand is a trigonometric polynomial, so the
    // quadrature engine agrees with the exact sum to rounding.
    let cfg = standard_config(4, 4, 2, 1);
    let m9 = 1;
    for m7 in 0..=4u32 {
        let outcome = outcome789(2, 1, m7, 4 - m7, m9);
        let exact = amplitude_sum_exact(&cfg, &outcome)
            .unwrap()
            .exact_probability()
            .unwrap()
            .to_f64();
        let (integral, _) = amplitude_integral(&cfg, &outcome).unwrap().probability();
        if exact > 1e-30 {
            assert!(
                (exact - integral).abs() / exact < 1e-12,
                "m7={m7}: {exact} vs {integral}"
            );
        } else {
            assert!(integral < 1e-25);
        }
    }
}

#[test]
fn float_probabilities_below_the_floor_are_flushed() {
    let amp = Amplitude {
        log: LogComplex {
            ln: 0.5 * (FLUSH_THRESHOLD_LN - 1.0),
            arg: 0.3,
        },
        exact: None,
    };
    let (p, flushed) = amp.probability();
    assert_eq!(p, 0.0);
    assert!(flushed);
    // True zeros are not reported as flushed.
    let zero = Amplitude {
        log: LogComplex::ZERO,
        exact: None,
    };
    assert_eq!(zero.probability(), (0.0, false));
}

#[test]
fn exact_probe_rows_match_oracle_at_quarter_turn_chi() {
    use crate::circuit::ProbeArm;
    for arm in [ProbeArm::Arm7, ProbeArm::Arm8] {
        let cfg = standard_config(3, 3, 2, 1).with_probe(arm, Angle::PI_2);
        let set = DetectorSet::Probe789;
        let joint = oracle::oracle_joint(&cfg, set).unwrap();
        for counts in enumerate_outcomes(set, cfg.total()) {
            let outcome = DetectionOutcome::from_counts(set, counts.clone()).unwrap();
            let exact_p = amplitude_sum_exact(&cfg, &outcome)
                .unwrap()
                .exact_probability()
                .unwrap()
                .to_f64();
            let oracle_p = joint.get(&counts).copied().unwrap_or(0.0);
            assert!(
                (exact_p - oracle_p).abs() < 1e-13,
                "{arm:?} {counts:?}: exact {exact_p} vs oracle {oracle_p}"
            );
        }
    }
}
