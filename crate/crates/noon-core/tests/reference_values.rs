//! Figure-level integration checks: distribution shapes and sweep structure
//! that the unit tests are too small to see.

use noon_core::circuit::{standard_config, CircuitConfig, Detector, DetectorSet};
use noon_core::efficiency;
use noon_core::engines::{conditional_distribution, EngineKind};
use noon_core::feedforward;
use noon_core::metrology;
use noon_core::quality;

/// The two-lobe NOON of the uncorrected circuit: N_a = N_b = 30,
/// m1 = m2 = 15, ξ = 0, distribution over m5.
#[test]
fn uncorrected_noon_two_lobes() {
    let config = CircuitConfig::uncorrected(30, 30);
    let dist = conditional_distribution(
        &config,
        DetectorSet::Side56,
        &[(Detector::D1, 15), (Detector::D2, 15)],
        Detector::D5,
        EngineKind::Exact,
    )
    .unwrap();
    assert_eq!(dist.pair_total, 30);
    // The lobes sit at the edges and mirror exactly.
    let exact = dist.exact_absolute.as_ref().unwrap();
    for m5 in 0..=30usize {
        assert_eq!(exact[m5], exact[30 - m5], "m5 = {m5}");
    }
    assert!(dist.probabilities[0] > 0.25);
    assert!(dist.probabilities[0] > 100.0 * dist.probabilities[15]);
    // Integral engine sees the same curve.
    let by_integral = conditional_distribution(
        &config,
        DetectorSet::Side56,
        &[(Detector::D1, 15), (Detector::D2, 15)],
        Detector::D5,
        EngineKind::Integral,
    )
    .unwrap();
    for (a, b) in dist.probabilities.iter().zip(&by_integral.probabilities) {
        assert!((a - b).abs() < 1e-12);
    }
}

/// Slightly uneven side counts still give a usable NOON: weight leaks
/// inward but the lobes stay edge-dominated.
#[test]
fn uncorrected_noon_with_uneven_side_counts() {
    let config = CircuitConfig::uncorrected(30, 30);
    let dist = conditional_distribution(
        &config,
        DetectorSet::Side56,
        &[(Detector::D1, 18), (Detector::D2, 12)],
        Detector::D5,
        EngineKind::Float,
    )
    .unwrap();
    // Still edge-dominated and mirror-symmetric, but with weight leaking
    // inward: q1 drops well below the m1 = m2 value.
    assert!((dist.probabilities[0] - dist.probabilities[30]).abs() < 1e-12);
    assert!(dist.probabilities[1..30]
        .iter()
        .all(|&p| p < dist.probabilities[0]));
    let q1 = quality::q1(&dist);
    assert!(q1 < 0.85, "phase states not quite orthogonal: q1 = {q1}");
    let even = conditional_distribution(
        &config,
        DetectorSet::Side56,
        &[(Detector::D1, 15), (Detector::D2, 15)],
        Detector::D5,
        EngineKind::Float,
    )
    .unwrap();
    assert!(quality::q1(&even) > q1 + 0.1);
}

/// Uncorrected sweep counts at (N, m56) = (60, 20): five
/// cells strictly above 0.90 plus two sitting at a displayed 0.90, three
/// above 0.95.
#[test]
fn uncorrected_sweep_counts_60_20() {
    let cells = efficiency::uncorrected_sweep(60, 20, EngineKind::Float).unwrap();
    let strict_90 = cells.iter().filter(|c| c.q1 > 0.90).count();
    let displayed_90 = cells.iter().filter(|c| c.q1 >= 0.895).count();
    let strict_95 = cells.iter().filter(|c| c.q1 > 0.95).count();
    assert_eq!(strict_90, 5);
    assert_eq!(
        displayed_90, 7,
        "the 'middle seven' count refers to displayed qualities"
    );
    assert_eq!(strict_95, 3);
    // Boundary flag: the two extra cells sit within 0.005 of the threshold.
    let borderline = cells.iter().filter(|c| (c.q1 - 0.90).abs() < 0.005).count();
    assert_eq!(borderline, 2);
    // Best quality on the diagonal, lowest absolute probability there too.
    let diag = cells.iter().find(|c| c.m1 == 20 && c.m2 == 20).unwrap();
    assert!(cells.iter().all(|c| c.q1 <= diag.q1 + 1e-12));
    assert!(cells.iter().all(|c| c.absolute >= diag.absolute - 1e-18));
}

/// At m56 = 30 only the diagonal cell reaches a displayed 0.95 and only the
/// middle three exceed 0.90.
#[test]
fn uncorrected_sweep_counts_60_30() {
    let cells = efficiency::uncorrected_sweep(60, 30, EngineKind::Float).unwrap();
    let displayed_95: Vec<_> = cells.iter().filter(|c| c.q1 >= 0.945).collect();
    assert_eq!(displayed_95.len(), 1);
    assert_eq!((displayed_95[0].m1, displayed_95[0].m2), (15, 15));
    assert_eq!(cells.iter().filter(|c| c.q1 > 0.90).count(), 3);
}

/// The per-m1 slice of the corrected sweep (N = 60, m78 = 20, m1 = 10):
/// two quality peaks at the locus crossings with a cusp at m2 = 10, and the
/// absolute probability peaking at the second crossing.
#[test]
fn corrected_slice_cusp_at_equal_counts() {
    let n = 60u32;
    let m78 = 20u32;
    let m1 = 10u32;
    let mut qs = Vec::new();
    let mut abs = Vec::new();
    for m2 in 1..=(n - m78 - m1) {
        let m9 = n - m78 - m1 - m2;
        let plan = feedforward::plan(n, m1, m2).unwrap();
        let config = plan.config(n / 2, n / 2);
        let dist = conditional_distribution(
            &config,
            DetectorSet::Output789,
            &[(Detector::D1, m1), (Detector::D2, m2), (Detector::D9, m9)],
            Detector::D7,
            EngineKind::Float,
        )
        .unwrap();
        qs.push(quality::q1(&dist));
        abs.push(dist.total_absolute);
    }
    // Two strict peaks around the m9-match crossings...
    let peaks: Vec<usize> = (1..qs.len() - 1)
        .filter(|&i| qs[i] > qs[i - 1] && qs[i] > qs[i + 1])
        .collect();
    assert!(peaks.len() >= 2, "peaks at {peaks:?}");
    // ...with the branch switch at m1 = m2 = 10 a local minimum (the cusp).
    let i10 = 10 - 1;
    assert!(
        qs[i10] < qs[i10 - 1] && qs[i10] < qs[i10 + 1],
        "no cusp at m2 = 10"
    );
    // The probability peak sits at the second crossing, m2 = 20.
    let argmax = abs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i + 1)
        .unwrap();
    assert_eq!(argmax as u32, 20);
}

/// The corrected-circuit working record: exact mean against the plan.
#[test]
fn exact_m9_mean_for_the_working_record() {
    let plan = feedforward::plan(70, 22, 8).unwrap();
    let dist =
        feedforward::exact_m9_distribution(35, 35, 22, 8, plan.transmission, EngineKind::Exact)
            .unwrap();
    let mean = dist.mean();
    // Exact mean at the plan transmission T = 8/22 (a rounded T = 0.37
    // shifts it to 18.29).
    assert!((mean - 18.47).abs() < 0.01, "mean {mean}");
    // The mean formula deviates from the exact mean by under one particle.
    assert!((plan.expected_m9 - mean).abs() <= 1.0);
}

/// The mean-formula envelope: |exact mean − approximation| ≤ 1 across a sweep
/// of records with m1 + m2 ≤ N/2 (violations outside the regime would be
/// logged, none occur inside it).
#[test]
fn eq25_envelope_holds_in_regime() {
    for (n_half, m1, m2) in [
        (10u32, 4u32, 2u32),
        (15, 6, 3),
        (20, 8, 2),
        (30, 18, 12),
        (70, 40, 10),
        (70, 45, 5),
    ] {
        let plan = feedforward::plan(2 * n_half, m1, m2).unwrap();
        let dist = feedforward::exact_m9_distribution(
            n_half,
            n_half,
            m1,
            m2,
            plan.transmission,
            EngineKind::Float,
        )
        .unwrap();
        let dev = (plan.expected_m9 - dist.mean()).abs();
        assert!(dev <= 1.0, "({n_half},{m1},{m2}): deviation {dev}");
    }
}

/// Classical Fisher information approaches the quantum value for the
/// corrected NOON probed near quadrature.
#[test]
fn fisher_information_near_quadrature() {
    use noon_core::circuit::ProbeArm;
    let config = standard_config(6, 6, 3, 1);
    let fixed = [(Detector::D1, 3), (Detector::D2, 1), (Detector::D9, 1)];
    let out = conditional_distribution(
        &config,
        DetectorSet::Output789,
        &fixed,
        Detector::D7,
        EngineKind::Float,
    )
    .unwrap();
    let m78 = out.pair_total as f64;
    let quadrature = 0.5 * std::f64::consts::FRAC_PI_2 / m78;
    let rep = metrology::classical_fisher(
        &config,
        ProbeArm::Arm7,
        quadrature,
        &fixed,
        EngineKind::Float,
    )
    .unwrap();
    assert!(rep.i_classical <= rep.i_quantum * (1.0 + 1e-6));
    assert!(
        rep.i_classical > 0.5 * rep.i_quantum,
        "I_cl = {} far below I_qu = {}",
        rep.i_classical,
        rep.i_quantum
    );
}
