//! The acceptance suite: every headline number of the study, re-derived and
//! checked at a pinned tolerance.
//!
//! Each criterion reports one line per sub-check. A handful of sub-checks
//! pin reference values that are unattainable — rounded, misprinted or
//! eyeballed upstream — and stay deliberately red with the computed value
//! and the analysis in the output rather than being loosened to pass.

use std::time::Instant;

use crate::circuit::{standard_config, Angle, CircuitConfig, Detector, DetectorSet, Transmission};
use crate::efficiency;
use crate::engines::{
    amplitude_integral, amplitude_sum_exact, amplitude_sum_float, conditional_distribution,
    enumerate_outcomes, oracle, DetectionOutcome, EngineKind, ExactReal,
};
use crate::feedforward::{self, expected_m9_exact};
use crate::metrology::{self, EstimationSetup, Likelihood};
use crate::numerics::{rational_to_f64, ExactRational};
use crate::phase;
use crate::quality;

/// One acceptance criterion's outcome.
#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub index: usize,
    pub name: &'static str,
    pub lines: Vec<String>,
    pub failures: usize,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn summary(&self) -> String {
        format!(
            "[{}] criterion {:2}: {} ({:.1} s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.index,
            self.name,
            self.seconds
        )
    }
}

struct Checker {
    lines: Vec<String>,
    failures: usize,
}

impl Checker {
    fn new() -> Self {
        Checker {
            lines: Vec::new(),
            failures: 0,
        }
    }

    fn note(&mut self, text: impl Into<String>) {
        self.lines.push(format!("       {}", text.into()));
    }

    fn check(&mut self, label: &str, passed: bool) {
        if !passed {
            self.failures += 1;
        }
        self.lines.push(format!(
            "  [{}] {label}",
            if passed { "pass" } else { "FAIL" }
        ));
    }

    fn approx(&mut self, label: &str, value: f64, expect: f64, tol: f64) {
        let passed = (value - expect).abs() <= tol;
        if !passed {
            self.failures += 1;
        }
        self.lines.push(format!(
            "  [{}] {label}: {value:.6} (expect {expect} ± {tol})",
            if passed { "pass" } else { "FAIL" }
        ));
    }

    fn finish(self, index: usize, name: &'static str, start: Instant) -> CriterionResult {
        CriterionResult {
            index,
            name,
            lines: self.lines,
            failures: self.failures,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

fn output_distribution(
    n_half: u32,
    m1: u32,
    m2: u32,
    m9: u32,
    transmission: Transmission,
    kind: EngineKind,
) -> crate::engines::OutcomeDistribution {
    let mut config = standard_config(n_half, n_half, m1, m2);
    config.transmission = transmission;
    conditional_distribution(
        &config,
        DetectorSet::Output789,
        &[(Detector::D1, m1), (Detector::D2, m2), (Detector::D9, m9)],
        Detector::D7,
        kind,
    )
    .expect("conserving conditioning")
}

/// Criterion 1 — the N = 140 quality-factor table with the float engine.
pub fn criterion_1() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checker::new();
    // (m1, m2, quoted T, quoted <m9>, q1, q2). The reference <m9> column
    // prints 19 in the (30,20) row; the mean formula gives exactly 18, and
    // the row's own m78 = 72 and T = 0.67 = 2/3 confirm 18 (a misprint).
    let rows = [
        (45u32, 5u32, 0.11, 72u32, 0.976, 0.990),
        (40, 10, 0.25, 54, 0.968, 0.993),
        (35, 15, 0.43, 36, 0.955, 0.993),
        (30, 20, 0.67, 18, 0.932, 0.992),
        (25, 25, 1.0, 0, 0.883, 0.988),
    ];
    for (m1, m2, t_printed, m9, q1_expect, q2_expect) in rows {
        let plan = feedforward::plan(140, m1, m2).expect("valid side counts");
        c.approx(
            &format!("({m1},{m2}) T"),
            plan.transmission.value(),
            t_printed,
            0.005,
        );
        let eq25 = expected_m9_exact(140, m1, m2);
        let eq25_f = rational_to_f64(&eq25);
        c.check(
            &format!("({m1},{m2}) round(mean-formula <m9>) = {m9} (computed {eq25_f})"),
            eq25_f.round() as u32 == m9,
        );
        if m1 == 30 {
            c.note("the reference prints <m9> = 19 for (30,20); the mean formula = 18 exactly");
            c.note("and the row's m78 = 72, T = 0.67 = 2/3 and q1 = 0.932 all imply 18.");
        }
        let dist = output_distribution(70, m1, m2, m9, plan.transmission, EngineKind::Float);
        let report = quality::report(&dist).expect("nonempty output pair");
        c.approx(&format!("({m1},{m2}) q1"), report.q1, q1_expect, 0.005);
        c.approx(&format!("({m1},{m2}) q2"), report.q2, q2_expect, 0.005);
    }
    let elapsed = start.elapsed().as_secs_f64();
    c.check(
        &format!("float-engine runtime {elapsed:.1} s < 60 s"),
        elapsed < 60.0,
    );
    c.finish(1, "quality-factor table (N = 140)", start)
}

/// Criterion 2 — the corrected-output fixtures at N = 70 and the m9 odds.
pub fn criterion_2() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checker::new();
    // T follows the exact transmission condition at the most probable
    // m9 = 18: T = (70-32)/(70+32) = 19/51 = 0.3725, quoted as 0.37.
    let t_corrected = Transmission::ratio(19, 51);
    for (m9, q1_expect, q2_expect) in [(18u32, 0.97, 0.99), (14, 0.91, 0.98)] {
        let dist = output_distribution(35, 22, 8, m9, t_corrected, EngineKind::Float);
        let report = quality::report(&dist).expect("nonempty output pair");
        c.approx(&format!("m9 = {m9}: q1"), report.q1, q1_expect, 0.005);
        c.approx(&format!("m9 = {m9}: q2"), report.q2, q2_expect, 0.005);
    }
    c.note("T = 19/51 = 0.3725: the exact transmission condition at the most probable");
    c.note("m9 = 18. The plan ratio 8/22 reproduces the m9 = 18 pair but gives");
    c.note("q1 = 0.886 at m9 = 14.");

    let plan = feedforward::plan(70, 22, 8).expect("valid side counts");
    let m9_dist =
        feedforward::exact_m9_distribution(35, 35, 22, 8, plan.transmission, EngineKind::Exact)
            .expect("m9 distribution");
    let mode = m9_dist.mode();
    let ratio = m9_dist.probabilities[14] / m9_dist.probabilities[mode as usize];
    c.approx(&format!("P(m9 = 14)/P(mode = {mode})"), ratio, 0.4, 0.05);
    c.note("this sub-check is unattainable: the ratio computes to 0.50 at the plan");
    c.note("transmission 8/22 (and 0.53 at T = 19/51); the reference ratio 0.4 is an");
    c.note("eyeballed value. Left red deliberately; see the decisions ledger.");
    c.finish(2, "corrected NOON output fixtures (N = 70)", start)
}

/// Criterion 3 — the poor-quality NOON fixture at N = 100.
pub fn criterion_3() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checker::new();
    // The reference's "T = 1" is a misprint for the feedforward value
    // T = m2/m1 = 1/7: only that reading reproduces q2 = 0.34 (T = 1
    // literal gives q2 = 0.47). m9 = 0 is an unlucky draw (mean 45).
    let dist = output_distribution(50, 35, 5, 0, Transmission::ratio(5, 35), EngineKind::Exact);
    let report = quality::report(&dist).expect("nonempty output pair");
    c.approx("q2 (at T = m2/m1 = 1/7)", report.q2, 0.34, 0.01);

    let exact_q1 = dist.exact_absolute.as_ref().expect("exact engine")[0].clone();
    c.check(
        &format!(
            "q1 = 0 exactly in the rational engine (computed q1 = {:.3e})",
            report.q1
        ),
        exact_q1.is_zero(),
    );
    c.note("unattainable: P(m7 = 0) is provably positive under every reading (all");
    c.note("surviving quadrature terms of the amplitude share one sign);");
    c.note("the exact rational value is ~4.1e-6, which the reference rounds to 0.");
    let literal = output_distribution(50, 35, 5, 0, Transmission::ONE, EngineKind::Float);
    let literal_report = quality::report(&literal).expect("nonempty");
    c.note(format!(
        "the literal T = 1 gives q1 = {:.4}, q2 = {:.4} (q2 far from 0.34).",
        literal_report.q1, literal_report.q2
    ));
    c.finish(3, "poor-quality NOON fixture (N = 100)", start)
}

/// Criterion 4 — the exact mean D9 count of a deep-correction record.
pub fn criterion_4() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checker::new();
    let dist = feedforward::exact_m9_distribution(
        70,
        70,
        40,
        10,
        Transmission::ratio(10, 40),
        EngineKind::Exact,
    )
    .expect("m9 distribution");
    let mean = dist
        .exact_mean()
        .map(|m| rational_to_f64(&m))
        .unwrap_or_else(|| dist.mean());
    c.approx(
        "exact <m9> (N_a = N_b = 70, m1 = 40, m2 = 10)",
        mean,
        53.6,
        0.05,
    );
    let eq25 = expected_m9_exact(140, 40, 10);
    c.check(
        "mean-formula value = 54 exactly",
        eq25 == ExactRational::from(num_bigint::BigInt::from(54)),
    );
    c.finish(4, "exact mean D9 count", start)
}

/// Criterion 5 — efficiency sweeps and the minimum-output acceptance table.
pub fn criterion_5() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checker::new();
    let avg = efficiency::averaged_uncorrected(60, 20, EngineKind::Float).expect("sweep");
    c.approx("uncorrected (60, 20): q1", avg.quality.q1, 0.27, 0.01);
    c.approx("uncorrected (60, 20): q2", avg.quality.q2, 0.53, 0.01);
    c.approx(
        "uncorrected (60, 20): total probability",
        avg.total_probability,
        0.0036,
        0.0002,
    );

    let avg = efficiency::averaged_corrected(60, 20, EngineKind::Float).expect("sweep");
    c.approx("corrected (60, 20): q1", avg.quality.q1, 0.94, 0.01);
    c.approx("corrected (60, 20): q2", avg.quality.q2, 0.98, 0.005);
    c.approx(
        "corrected (60, 20): total probability (%)",
        100.0 * avg.total_probability,
        2.1,
        0.2,
    );

    let avg = efficiency::averaged_corrected(60, 44, EngineKind::Float).expect("sweep");
    c.approx("corrected (60, 44): q1", avg.quality.q1, 0.81, 0.02);
    c.approx("corrected (60, 44): q2", avg.quality.q2, 0.96, 0.01);
    let total = avg.total_probability;
    c.check(
        &format!("corrected (60, 44): total {total:.2e} within 50% of 6e-6"),
        (total - 6e-6).abs() <= 3e-6,
    );

    // Acceptance table. Thresholds act on two-decimal displayed qualities,
    // i.e. q1 >= threshold - 0.005; with knife-edge thresholds three cells
    // move by whole tenths of a percent otherwise.
    let table = efficiency::table_minn(60, &[35, 30, 20, 15], &[0.895, 0.945], EngineKind::Float)
        .expect("sweep");
    let printed = [
        (35u32, 0.30, 0.0),
        (30, 2.7, 0.2),
        (20, 6.2, 1.6),
        (15, 6.2, 2.0),
    ];
    for (i, (n_min, p90, p95)) in printed.iter().enumerate() {
        c.approx(&format!("N_min {n_min} @ 0.90 (%)"), table[i][0], *p90, 0.2);
        c.approx(&format!("N_min {n_min} @ 0.95 (%)"), table[i][1], *p95, 0.2);
    }
    c.note("the (N_min = 20, 0.95) cell is unattainable: computed 1.99% vs quoted 1.6%.");
    c.note("The quoted 1.6 contradicts the same table's (15, 0.95) = 2.0 cell, since the");
    c.note("m56 in [15, 20) records carry only ~0.02% of qualifying mass (their absolute");
    c.note("probabilities are below 1.3e-5). Left red; see the decisions ledger.");
    c.finish(5, "efficiency sweeps and acceptance table", start)
}

/// Criterion 6 — engine triangulation.
pub fn criterion_6() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checker::new();

    // Exact sum vs integral representation on every quality-table and
    // output-fixture probability above the 1e-30 floor.
    let mut worst: f64 = 0.0;
    let mut compared = 0usize;
    let mut fixtures: Vec<(u32, u32, u32, u32, Transmission)> = vec![
        (70, 22, 8, 18, Transmission::ratio(19, 51)),
        (70, 22, 8, 14, Transmission::ratio(19, 51)),
    ];
    for (m1, m2) in [(45u32, 5u32), (40, 10), (35, 15), (30, 20), (25, 25)] {
        let plan = feedforward::plan(140, m1, m2).expect("valid side counts");
        let m9 = rational_to_f64(&expected_m9_exact(140, m1, m2)).round() as u32;
        fixtures.push((140, m1, m2, m9, plan.transmission));
    }
    for (n, m1, m2, m9, t) in fixtures {
        let exact = output_distribution(n / 2, m1, m2, m9, t, EngineKind::Exact);
        let integral = output_distribution(n / 2, m1, m2, m9, t, EngineKind::Integral);
        for (a, b) in exact.absolute.iter().zip(&integral.absolute) {
            if *a > 1e-30 && *b > 1e-30 {
                worst = worst.max((a - b).abs() / a.max(*b));
                compared += 1;
            }
        }
    }
    c.check(
        &format!(
            "exact vs integral on {compared} fixture probabilities: worst rel {worst:.2e} <= 1e-10"
        ),
        worst <= 1e-10,
    );

    // Both engines against the statevector oracle: exhaustive outcomes at
    // N <= 8 over 50 seeded random configurations.
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20260810);
    let mut worst_abs: f64 = 0.0;
    for case in 0..50 {
        let n_alpha = rng.gen_range(0..=4u32);
        let n_beta = rng.gen_range(if n_alpha == 0 { 1 } else { 0 }..=(8 - n_alpha).min(4));
        let config = CircuitConfig {
            n_alpha,
            n_beta,
            theta: Angle::Radians(rng.gen_range(-3.1..3.1)),
            xi: Angle::Radians(rng.gen_range(-3.1..3.1)),
            zeta: Angle::Radians(rng.gen_range(-3.1..3.1)),
            transmission: Transmission::Value(rng.gen_range(0.0..1.0)),
            probe: None,
        };
        let set = if case % 2 == 0 {
            DetectorSet::Output789
        } else {
            DetectorSet::Side56
        };
        let joint = oracle::oracle_joint(&config, set).expect("within cost guard");
        for counts in enumerate_outcomes(set, config.total()) {
            let outcome = DetectionOutcome::from_counts(set, counts.clone()).expect("counts");
            let reference = joint.get(&counts).copied().unwrap_or(0.0);
            let (sum_p, _) = amplitude_sum_float(&config, &outcome)
                .expect("conserving")
                .probability();
            let (int_p, _) = amplitude_integral(&config, &outcome)
                .expect("conserving")
                .probability();
            worst_abs = worst_abs
                .max((sum_p - reference).abs())
                .max((int_p - reference).abs());
        }
    }
    c.check(
        &format!(
            "both engines vs oracle over 50 random configs: worst abs {worst_abs:.2e} <= 1e-12"
        ),
        worst_abs <= 1e-12,
    );
    c.finish(6, "engine triangulation", start)
}

/// Criterion 7 — unitarity of the joint distributions.
pub fn criterion_7() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checker::new();

    // Exact: every complete set sums to exactly 1 at N = 20.
    let config = standard_config(10, 10, 2, 1);
    for set in [
        DetectorSet::Side56,
        DetectorSet::Feedforward569,
        DetectorSet::Output789,
    ] {
        use rayon::prelude::*;
        let outcomes = enumerate_outcomes(set, 20);
        let partials: Vec<ExactReal> = outcomes
            .par_iter()
            .map(|counts| {
                let outcome = DetectionOutcome::from_counts(set, counts.clone()).expect("counts");
                amplitude_sum_exact(&config, &outcome)
                    .expect("standard config")
                    .exact_probability()
                    .expect("exact")
                    .clone()
            })
            .collect();
        let mut total = ExactReal::zero();
        for p in &partials {
            total.add_assign(p);
        }
        c.check(
            &format!("{set:?}: Σ|C|² = 1 exactly (rational engine, N = 20)"),
            total.is_rational()
                && total.rational == ExactRational::from(num_bigint::BigInt::from(1)),
        );
    }

    // Float at N = 140: the full side set sums to 1...
    let config = standard_config(70, 70, 22, 8);
    use rayon::prelude::*;
    let total: f64 = (0..=140u32)
        .into_par_iter()
        .map(|m1| {
            let mut sub = 0.0;
            for m2 in 0..=(140 - m1) {
                let dist = conditional_distribution(
                    &config,
                    DetectorSet::Side56,
                    &[(Detector::D1, m1), (Detector::D2, m2)],
                    Detector::D5,
                    EngineKind::Float,
                )
                .expect("conserving");
                sub += dist.total_absolute;
            }
            sub
        })
        .sum();
    c.check(
        &format!("Side56 N = 140 float: Σ = {total:.15} within 1e-12 of 1"),
        (total - 1.0).abs() <= 1e-12,
    );

    // ...and the three sets agree on the (m1, m2) marginal at spot cells,
    // which is unitarity of the downstream stages.
    for (m1, m2) in [(22u32, 8u32), (45, 5), (25, 25)] {
        let config = standard_config(70, 70, m1, m2);
        let side = conditional_distribution(
            &config,
            DetectorSet::Side56,
            &[(Detector::D1, m1), (Detector::D2, m2)],
            Detector::D5,
            EngineKind::Float,
        )
        .expect("conserving")
        .total_absolute;
        let mut worst_rel: f64 = 0.0;
        for set in [DetectorSet::Feedforward569, DetectorSet::Output789] {
            let (free, summed) = match set {
                DetectorSet::Feedforward569 => (Detector::D9, Detector::D5Prime),
                _ => (Detector::D9, Detector::D7),
            };
            let marginal = crate::engines::summed_distribution(
                &config,
                set,
                &[(Detector::D1, m1), (Detector::D2, m2)],
                free,
                summed,
                EngineKind::Float,
            )
            .expect("conserving")
            .total_absolute;
            worst_rel = worst_rel.max((marginal - side).abs() / side);
        }
        c.check(
            &format!("cross-set (m1, m2) = ({m1},{m2}) marginal agreement at N = 140: {worst_rel:.2e} <= 1e-12"),
            worst_rel <= 1e-12,
        );
    }

    // Full float unitarity of the corrected set at a mid-size N.
    let config = standard_config(15, 15, 2, 1);
    let outcomes = enumerate_outcomes(DetectorSet::Output789, 30);
    let total: f64 = outcomes
        .par_iter()
        .map(|counts| {
            let outcome = DetectionOutcome::from_counts(DetectorSet::Output789, counts.clone())
                .expect("counts");
            amplitude_sum_float(&config, &outcome)
                .expect("conserving")
                .probability()
                .0
        })
        .sum();
    c.check(
        &format!("Output789 N = 30 float-sum: Σ = {total:.15} within 1e-12 of 1"),
        (total - 1.0).abs() <= 1e-12,
    );
    c.finish(7, "unitarity", start)
}

/// Criterion 8 — algebraic identities, all in exact rational arithmetic.
pub fn criterion_8() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checker::new();

    let mut cubic_ok = true;
    for (n, m1, m2, m9) in [
        (140u32, 45u32, 5u32, 72u32),
        (140, 30, 20, 18),
        (60, 20, 10, 10),
        (60, 25, 5, 21),
        (20, 6, 3, 4),
    ] {
        let t = phase::exact_transmission(n, m1, m2, m9).expect("positive denominator");
        let m78 = n - m1 - m2 - m9;
        if phase::cubic_at_sqrt_t(m1, m2, m9, m78, &t)
            != ExactRational::from(num_bigint::BigInt::from(0))
        {
            cubic_ok = false;
        }
    }
    c.check(
        "the peak cubic vanishes at X = √T with the exact-condition T",
        cubic_ok,
    );

    let mut sc_ok = true;
    for n in [20u32, 60, 99, 140] {
        for m1 in 1..=15u32 {
            for m2 in 1..=m1 {
                if m1 + m2 <= n && !feedforward::self_consistency_identity(n, m1, m2) {
                    sc_ok = false;
                }
            }
        }
    }
    c.check(
        "substituting the closed-form mean into the exact condition returns T = m2/m1",
        sc_ok,
    );

    let mut id_ok = true;
    for (na, nb, m1, m2, t) in [
        (8u32, 8u32, 3u32, 2u32, Transmission::ratio(2, 3)),
        (10, 10, 4, 1, Transmission::ratio(1, 4)),
        (6, 6, 2, 2, Transmission::ONE),
        (9, 7, 3, 2, Transmission::ratio(2, 3)),
    ] {
        let rel = feedforward::mean_relations_report(na, nb, m1, m2, t).expect("exact means");
        if !rel.identity_residual_exact_zero || !rel.conservation_residual_exact_zero {
            id_ok = false;
        }
    }
    c.check(
        "<m9> = (1-T)(N - m1 - m2 - <m6>) holds exactly on computed expectations",
        id_ok,
    );
    c.finish(8, "algebraic identities", start)
}

/// Criterion 9 — metrology: path symmetry, Fisher identities, the resource
/// threshold and the Cramer-Rao convergence of the Bayesian protocol.
pub fn criterion_9() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checker::new();

    let mut worst_residual: f64 = 0.0;
    for (n_half, m1, m2, m9) in [
        (35u32, 22u32, 8u32, 18u32),
        (70, 45, 5, 72),
        (30, 15, 15, 0),
    ] {
        let config = standard_config(n_half, n_half, m1, m2);
        let report = metrology::path_symmetry_check(&config, m1, m2, m9, EngineKind::Float)
            .expect("amplitudes");
        worst_residual = worst_residual.max(report.max_gamma_residual);
    }
    c.check(
        &format!(
            "path-symmetry residual on standard corrected configs: {worst_residual:.2e} <= 1e-10"
        ),
        worst_residual <= 1e-10,
    );
    let mut broken = standard_config(35, 35, 22, 8);
    broken.zeta = Angle::Radians(std::f64::consts::PI / 3.0);
    let broken_res = metrology::path_symmetry_check(&broken, 22, 8, 18, EngineKind::Float)
        .expect("amplitudes")
        .max_gamma_residual;
    c.check(
        &format!("deliberately broken ζ = π/3 config has residual {broken_res:.2e} > 1e-3"),
        broken_res > 1e-3,
    );

    let dist = output_distribution(
        35,
        22,
        8,
        18,
        Transmission::ratio(19, 51),
        EngineKind::Float,
    );
    let q2 = quality::q2(&dist).expect("nonempty");
    let iq = metrology::quantum_fisher(&dist);
    let m78 = dist.pair_total as f64;
    c.check(
        &format!(
            "I_qu = q2·m78² identity: |{iq:.6} - {:.6}| <= 1e-9",
            q2 * m78 * m78
        ),
        (iq - q2 * m78 * m78).abs() <= 1e-9,
    );

    let mut dual_ok = true;
    for m78 in [4u32, 8, 20] {
        let dist =
            metrology::dual_fock_distribution(m78 / 2, EngineKind::Exact).expect("dual Fock");
        let q2 = quality::q2(&dist).expect("nonempty");
        let expect = 0.5 + 1.0 / m78 as f64;
        if (q2 - expect).abs() > 1e-10 {
            dual_ok = false;
        }
    }
    c.check(
        "dual-Fock q2 = 1/2 + 1/m78 for m78 in {4, 8, 20} to 1e-10",
        dual_ok,
    );

    let f_min = metrology::minimal_fraction(0.95);
    c.approx("resource threshold f at q2 = 0.95", f_min, 0.72, 0.005);
    c.note("unattainable: the exact minimal fraction is 1/√(2·0.95) = 0.72548; the");
    c.note("reference truncates it to 0.72 and the 0.72 ± 0.005 window misses the exact");
    c.note("value by 0.0005.");
    c.note("Left red; see the decisions ledger.");

    // Cramer-Rao convergence, seeded and deterministic: ν = 50 estimates of
    // t = 100 shots each (t·ν = 5000); the per-estimate RMS converges to
    // 1/√(t·I); the final combined estimate, replicated 60 times, to
    // 1/√(ν·t·I).
    let m78 = 4u32;
    let true_chi = 0.3;
    let period = 2.0 * std::f64::consts::PI / m78 as f64;
    let base = EstimationSetup {
        true_chi,
        shots: 100,
        repetitions: 50,
        seed: 0,
        prior_lo: true_chi - 0.25 * period,
        prior_hi: true_chi + 0.25 * period,
        grid_points: 2048,
    };
    let likelihood = Likelihood::IdealNoon { m78 };
    let mut final_sq = 0.0;
    let mut single_report = None;
    for replica in 0..60u64 {
        let setup = EstimationSetup {
            seed: 1000 + replica * 7919,
            ..base.clone()
        };
        let report = metrology::bayesian_estimate(&setup, &likelihood).expect("estimation");
        final_sq += (report.final_estimate - true_chi).powi(2);
        if replica == 0 {
            single_report = Some(report);
        }
    }
    let single = single_report.expect("at least one replica");
    let per_estimate_ratio = single.rms_error / single.single_bound;
    c.check(
        &format!(
            "per-estimate RMS {:.5} within 20% of 1/√(t·I) = {:.5} (ratio {per_estimate_ratio:.3})",
            single.rms_error, single.single_bound
        ),
        (per_estimate_ratio - 1.0).abs() <= 0.2,
    );
    let final_rms = (final_sq / 60.0).sqrt();
    let final_ratio = final_rms / single.cramer_rao_bound;
    c.check(
        &format!(
            "combined-estimate RMS {:.6} within 20% of 1/√(ν·t·I) = {:.6} (ratio {final_ratio:.3})",
            final_rms, single.cramer_rao_bound
        ),
        (final_ratio - 1.0).abs() <= 0.2,
    );
    c.finish(9, "metrology", start)
}

/// Criterion 10 — interference fringes against the single-sum fixture.
pub fn criterion_10() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checker::new();
    // The stated parameters N_a = N_b = 40 with m1 = m2 = 40 cannot
    // conserve particles (they leave m78 = 0); the reproducible reading
    // keeps the sources at 40 + 40 and splits the 40 side counts equally:
    // m1 = m2 = 20, fringes over m78 = 40 particles.
    let dist = metrology::fringe_distribution(40, 40, 20, 20, EngineKind::Exact)
        .expect("fringe distribution");
    let fixture = metrology::p78_uzero_fixture(40, 20, 20, 40);
    let worst = fixture
        .iter()
        .zip(&dist.probabilities)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    c.check(
        &format!("engine vs single-sum fixture per point: {worst:.2e} <= 1e-10"),
        worst <= 1e-10,
    );
    let maxima = metrology::strict_local_maxima(&dist.probabilities);
    c.check(
        &format!("oscillatory: {maxima} strict local maxima >= 10"),
        maxima >= 10,
    );
    c.note("the companion approximation curve sometimes drawn with these fringes has");
    c.note("no unambiguous definition and is not reproduced; only the exact curve is");
    c.note("asserted.");
    c.finish(10, "interference fringes", start)
}

/// Run the whole acceptance suite in order.
pub fn run_all() -> Vec<CriterionResult> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ]
}
