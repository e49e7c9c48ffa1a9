//! The feedforward correction rule.
//!
//! After D1/D2 register (m₁, m₂), the D9 transmission is set from those
//! counts alone. The self-consistent solution of the exact transmission
//! condition with the mean m₉ count is the simple ratio rule
//!
//! `T = m₂/m₁` (roles swapped when m₂ > m₁, with ξ = +π/2), and
//! `⟨m₉⟩ = (m₁-m₂)/(m₁+m₂) · (N-m₁-m₂)`.
//!
//! This module also computes the exact m₉ statistics behind the rule: the
//! distribution P(m₉) from the joint counts just before the final splitter,
//! the analytic Γ-function form available for equal sources, and the exact
//! mean relations that prove the rule.

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{standard_config, CircuitConfig, Detector, DetectorSet, Transmission};
use crate::engines::{summed_distribution, EngineError, EngineKind, OutcomeDistribution};
use crate::numerics::{ln_gamma, rational_to_f64, ExactRational};

#[derive(Debug, Error)]
pub enum FeedforwardError {
    #[error(
        "feedforward needs at least one side count (m1 = m2 = 0 carries no phase information)"
    )]
    NoSideCounts,
    #[error("side counts m1 + m2 = {got} exceed the total particle number {total}")]
    TooManyCounts { got: u32, total: u32 },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("analytic m9 distribution disagrees with the engine (max deviation {0:.3e})")]
    CrossCheck(f64),
}

/// The correction plan derived from one (m₁, m₂) record.
#[derive(Clone, Debug, Serialize)]
pub struct FeedforwardPlan {
    pub n: u32,
    pub m1: u32,
    pub m2: u32,
    /// Exact transmission `min/max` of the two side counts (1 when equal).
    pub transmission: Transmission,
    /// +1 for the ξ = +π/2 branch (m₂ > m₁), −1 for ξ = −π/2.
    pub xi_sign: i8,
    /// Closed-form mean ⟨m₉⟩ = |m₁-m₂|/(m₁+m₂)·(N-m₁-m₂).
    pub expected_m9: f64,
    /// Most probable m₉: the mode of the exact distribution when the
    /// equal-source analytic path can compute it, else round(expected_m9).
    pub most_probable_m9: u32,
}

impl FeedforwardPlan {
    pub fn config(&self, n_alpha: u32, n_beta: u32) -> CircuitConfig {
        standard_config(n_alpha, n_beta, self.m1, self.m2)
    }

    pub fn json_value(&self) -> serde_json::Value {
        let (num, den) = self.transmission.as_ratio().unwrap_or((0, 1));
        serde_json::json!({
            "n": self.n,
            "m1": self.m1,
            "m2": self.m2,
            "transmission": format!("{num}/{den}"),
            "transmission_value": self.transmission.value(),
            "xi": if self.xi_sign >= 0 { "pi/2" } else { "-pi/2" },
            "expected_m9": self.expected_m9,
            "most_probable_m9": self.most_probable_m9,
        })
    }
}

/// The closed-form mean count as an exact rational:
/// |m₁-m₂|/(m₁+m₂)·(N-m₁-m₂).
pub fn expected_m9_exact(n: u32, m1: u32, m2: u32) -> ExactRational {
    let diff = (m1 as i64 - m2 as i64).abs();
    let rest = n as i64 - m1 as i64 - m2 as i64;
    ExactRational::new(
        BigInt::from(diff * rest),
        BigInt::from(m1 as i64 + m2 as i64),
    )
}

/// Build the correction plan for observed side counts.
pub fn plan(n: u32, m1: u32, m2: u32) -> Result<FeedforwardPlan, FeedforwardError> {
    if m1 == 0 && m2 == 0 {
        return Err(FeedforwardError::NoSideCounts);
    }
    if m1 + m2 > n {
        return Err(FeedforwardError::TooManyCounts {
            got: m1 + m2,
            total: n,
        });
    }
    let (lo, hi) = (m1.min(m2), m1.max(m2));
    let transmission = if lo == hi {
        Transmission::ONE
    } else {
        Transmission::ratio(lo as u64, hi as u64)
    };
    let expected = rational_to_f64(&expected_m9_exact(n, m1, m2));
    // Equal sources admit the analytic distribution; its mode is the
    // most probable value the correction protocol speaks of.
    let most_probable = if n.is_multiple_of(2) && n <= 400 {
        let probs = analytic_m9_probabilities(n / 2, n / 2, m1, m2, transmission.value());
        probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i as u32)
            .unwrap_or_else(|| expected.round() as u32)
    } else {
        expected.round() as u32
    };
    Ok(FeedforwardPlan {
        n,
        m1,
        m2,
        transmission,
        xi_sign: if m2 > m1 { 1 } else { -1 },
        expected_m9: expected,
        most_probable_m9: most_probable,
    })
}

/// Closed Γ-function form of P(m₉) for equal sources: the phase integral of
/// the (1,1)/(1,−1)-family amplitude is a Beta function, so each joint
/// probability is a product of two Γ factors with the T^{m₅'}R^{m₉}
/// splitter weights.
pub fn analytic_m9_probabilities(
    n_alpha: u32,
    n_beta: u32,
    m1: u32,
    m2: u32,
    transmission: f64,
) -> Vec<f64> {
    assert_eq!(n_alpha, n_beta, "analytic path requires equal sources");
    let n = n_alpha + n_beta;
    let rest = n - m1 - m2;
    let r = 1.0 - transmission;
    let ln_t = if transmission > 0.0 {
        transmission.ln()
    } else {
        f64::NEG_INFINITY
    };
    let ln_r = if r > 0.0 { r.ln() } else { f64::NEG_INFINITY };

    let mut term_rows: Vec<Vec<f64>> = Vec::with_capacity(rest as usize + 1);
    let mut scale_max = f64::NEG_INFINITY;
    for m9 in 0..=rest {
        let mut row = Vec::new();
        for m5p in 0..=(rest - m9) {
            let m6 = rest - m9 - m5p;
            // Odd sin powers integrate to zero: only even m2 + m6 survives.
            if (m2 + m6).is_multiple_of(2) {
                let ln = ln_weight(m9, m5p, m6, ln_t, ln_r)
                    + 2.0
                        * (ln_gamma((1 + m1 + m5p + m9) as f64 / 2.0)
                            + ln_gamma((1 + m2 + m6) as f64 / 2.0));
                if ln > scale_max {
                    scale_max = ln;
                }
                row.push(ln);
            }
        }
        term_rows.push(row);
    }
    if scale_max == f64::NEG_INFINITY {
        scale_max = 0.0;
    }
    let raw: Vec<f64> = term_rows
        .iter()
        .map(|row| row.iter().map(|ln| (ln - scale_max).exp()).sum::<f64>())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|p| p / total).collect()
}

fn ln_weight(m9: u32, m5p: u32, m6: u32, ln_t: f64, ln_r: f64) -> f64 {
    let t_part = if m5p == 0 { 0.0 } else { m5p as f64 * ln_t };
    let r_part = if m9 == 0 { 0.0 } else { m9 as f64 * ln_r };
    t_part + r_part
        - crate::numerics::ln_factorial(m9 as u64)
        - crate::numerics::ln_factorial(m5p as u64)
        - crate::numerics::ln_factorial(m6 as u64)
}

/// Exact P(m₉): the engine's joint distribution over {1,2,5′,6,9} summed
/// over m₅′. For equal sources the result is cross-checked against the
/// analytic Γ-function form; unequal sources just use the engine.
pub fn exact_m9_distribution(
    n_alpha: u32,
    n_beta: u32,
    m1: u32,
    m2: u32,
    transmission: Transmission,
    kind: EngineKind,
) -> Result<OutcomeDistribution, FeedforwardError> {
    let mut config = standard_config(n_alpha, n_beta, m1, m2);
    config.transmission = transmission;
    let dist = summed_distribution(
        &config,
        DetectorSet::Feedforward569,
        &[(Detector::D1, m1), (Detector::D2, m2)],
        Detector::D9,
        Detector::D5Prime,
        kind,
    )?;
    if n_alpha == n_beta {
        let analytic = analytic_m9_probabilities(n_alpha, n_beta, m1, m2, transmission.value());
        let worst = analytic
            .iter()
            .zip(&dist.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if worst > 1e-9 {
            return Err(FeedforwardError::CrossCheck(worst));
        }
    }
    Ok(dist)
}

/// The mean relations behind the ratio rule, on exact expectations.
#[derive(Clone, Debug, Serialize)]
pub struct MeanRelations {
    pub m5_mean: f64,
    pub m6_mean: f64,
    pub m9_mean: f64,
    /// ⟨m₉⟩ − (1−T)(N − m₁ − m₂ − ⟨m₆⟩); an identity, zero in rational
    /// arithmetic.
    pub identity_residual_exact_zero: bool,
    pub identity_residual: f64,
    /// ⟨m₅⟩ + ⟨m₆⟩ − (N − m₁ − m₂); particle conservation.
    pub conservation_residual_exact_zero: bool,
    /// ⟨m₅⟩/⟨m₆⟩ against m₁/m₂ and the refined (m₁+½)/(m₂+½).
    pub ratio: f64,
    pub ratio_plain_deviation: f64,
    pub ratio_refined_deviation: f64,
}

/// Compute ⟨m₅⟩, ⟨m₆⟩, ⟨m₉⟩ exactly (m₅ ≡ m₅′ + m₉) and report the
/// residuals of the mean relations.
pub fn mean_relations_report(
    n_alpha: u32,
    n_beta: u32,
    m1: u32,
    m2: u32,
    transmission: Transmission,
) -> Result<MeanRelations, FeedforwardError> {
    let mut config = standard_config(n_alpha, n_beta, m1, m2);
    config.transmission = transmission;
    let fixed = [(Detector::D1, m1), (Detector::D2, m2)];

    let m9_dist = summed_distribution(
        &config,
        DetectorSet::Feedforward569,
        &fixed,
        Detector::D9,
        Detector::D5Prime,
        EngineKind::Exact,
    )?;
    let m6_dist = summed_distribution(
        &config,
        DetectorSet::Feedforward569,
        &fixed,
        Detector::D6,
        Detector::D5Prime,
        EngineKind::Exact,
    )?;

    let m9_mean_exact = m9_dist.exact_mean().expect("rational exact distribution");
    let m6_mean_exact = m6_dist.exact_mean().expect("rational exact distribution");
    let rest = ExactRational::from(BigInt::from(
        n_alpha as i64 + n_beta as i64 - m1 as i64 - m2 as i64,
    ));
    // m5 = m5' + m9: the count upstream of the D9 splitter.
    let m5_mean_exact = &rest - &m6_mean_exact;

    let (num, den) = transmission
        .as_ratio()
        .expect("plan transmissions are exact");
    let t_exact = ExactRational::new(BigInt::from(num), BigInt::from(den));
    let r_exact = ExactRational::from(BigInt::from(1)) - &t_exact;

    let identity = &m9_mean_exact - &r_exact * (&rest - &m6_mean_exact);
    let conservation = &m5_mean_exact + &m6_mean_exact - &rest;

    let m5_mean = rational_to_f64(&m5_mean_exact);
    let m6_mean = rational_to_f64(&m6_mean_exact);
    let ratio = m5_mean / m6_mean;
    let plain = m1 as f64 / m2 as f64;
    let refined = (m1 as f64 + 0.5) / (m2 as f64 + 0.5);

    Ok(MeanRelations {
        m5_mean,
        m6_mean,
        m9_mean: rational_to_f64(&m9_mean_exact),
        identity_residual_exact_zero: identity == ExactRational::from(BigInt::from(0)),
        identity_residual: rational_to_f64(&identity),
        conservation_residual_exact_zero: conservation == ExactRational::from(BigInt::from(0)),
        ratio,
        ratio_plain_deviation: (ratio - plain).abs(),
        ratio_refined_deviation: (ratio - refined).abs(),
    })
}

/// Exact self-consistency: substituting the closed-form mean into the exact
/// transmission condition returns the plan ratio m₂/m₁ identically.
pub fn self_consistency_identity(n: u32, m1: u32, m2: u32) -> bool {
    assert!(m1 >= m2 && m2 > 0);
    let mean = expected_m9_exact(n, m1, m2);
    let n_rat = ExactRational::from(BigInt::from(n));
    let k = ExactRational::from(BigInt::from(m1 as i64 - m2 as i64)) + &mean;
    let t = (&n_rat - &k) / (&n_rat + &k);
    t == ExactRational::new(BigInt::from(m2), BigInt::from(m1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_examples() {
        // The (40, 10) row of the N = 140 quality table.
        let p = plan(140, 40, 10).unwrap();
        assert_eq!(p.transmission.as_ratio(), Some((10, 40)));
        assert_eq!(p.expected_m9, 54.0);
        assert_eq!(p.most_probable_m9, 54);
        assert_eq!(p.xi_sign, -1);

        // Equal counts: no correction.
        let p = plan(140, 25, 25).unwrap();
        assert_eq!(p.transmission, Transmission::ONE);
        assert_eq!(p.expected_m9, 0.0);
        assert_eq!(p.most_probable_m9, 0);

        // The corrected-circuit working example: T = 8/22, expected 18.67,
        // and the exact distribution's mode 19 as the most probable value.
        let p = plan(70, 22, 8).unwrap();
        assert_eq!(p.transmission.as_ratio(), Some((8, 22)));
        assert!((p.expected_m9 - 14.0 / 30.0 * 40.0).abs() < 1e-12);
        assert_eq!(p.most_probable_m9, 19);

        // Role swap: only the ξ branch flips.
        let p = plan(70, 8, 22).unwrap();
        assert_eq!(p.transmission.as_ratio(), Some((8, 22)));
        assert_eq!(p.xi_sign, 1);
    }

    #[test]
    fn plan_serializes_with_exact_ratio() {
        let p = plan(70, 22, 8).unwrap();
        let v = p.json_value();
        assert_eq!(v["transmission"], "8/22");
        assert_eq!(v["xi"], "-pi/2");
        assert_eq!(v["most_probable_m9"], 19);
    }

    #[test]
    fn plan_errors() {
        assert!(matches!(
            plan(10, 0, 0),
            Err(FeedforwardError::NoSideCounts)
        ));
        assert!(matches!(
            plan(10, 8, 8),
            Err(FeedforwardError::TooManyCounts { got: 16, total: 10 })
        ));
    }

    #[test]
    fn plan_transmission_depends_only_on_the_ratio() {
        let a = plan(100, 30, 10).unwrap();
        let b = plan(200, 30, 10).unwrap();
        assert_eq!(a.transmission.value(), b.transmission.value());
        let c = plan(100, 9, 3).unwrap();
        assert!((c.transmission.value() - a.transmission.value()).abs() < 1e-15);
    }

    #[test]
    fn self_consistency_sweep() {
        for n in [20u32, 60, 99, 140] {
            for m1 in 1..=20u32 {
                for m2 in 1..=m1 {
                    if m1 + m2 <= n {
                        assert!(self_consistency_identity(n, m1, m2), "({n},{m1},{m2})");
                    }
                }
            }
        }
    }

    #[test]
    fn exact_m9_distribution_small_cross_check() {
        // Equal sources: the analytic Γ form must match the exact engine;
        // the constructor performs that cross-check internally.
        let dist = exact_m9_distribution(5, 5, 3, 1, Transmission::ratio(1, 3), EngineKind::Exact)
            .unwrap();
        // Frozen from the independent brute-force reference.
        let expect = [
            0.049009, 0.166854, 0.243172, 0.284325, 0.183315, 0.073326, 0.0,
        ];
        for (p, e) in dist.probabilities.iter().zip(expect) {
            assert!((p - e).abs() < 1e-6, "{p} vs {e}");
        }
    }

    #[test]
    fn full_transmission_routes_nothing_to_d9() {
        let dist = exact_m9_distribution(4, 4, 2, 2, Transmission::ONE, EngineKind::Exact).unwrap();
        assert!((dist.probabilities[0] - 1.0).abs() < 1e-15);
        assert!(dist.probabilities[1..].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn unequal_sources_skip_the_analytic_path() {
        let dist = exact_m9_distribution(5, 3, 2, 1, Transmission::ratio(1, 2), EngineKind::Exact)
            .unwrap();
        let total: f64 = dist.probabilities.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_relations_hold_exactly() {
        for (na, nb, m1, m2, t) in [
            (6u32, 6u32, 3u32, 2u32, Transmission::ratio(2, 3)),
            (8, 8, 4, 1, Transmission::ratio(1, 4)),
            (7, 5, 3, 2, Transmission::ratio(2, 3)),
            (6, 6, 2, 2, Transmission::ONE),
        ] {
            let rel = mean_relations_report(na, nb, m1, m2, t).unwrap();
            assert!(rel.identity_residual_exact_zero, "({na},{nb},{m1},{m2})");
            assert!(rel.conservation_residual_exact_zero);
        }
    }

    #[test]
    fn mean_ratio_tracks_the_refined_form() {
        // ⟨m5⟩/⟨m6⟩ ≅ (m1+½)/(m2+½) for large rest counts.
        let rel = mean_relations_report(30, 30, 18, 12, Transmission::ratio(12, 18)).unwrap();
        assert!(
            rel.ratio_refined_deviation < 0.05,
            "ratio {} refined dev {}",
            rel.ratio,
            rel.ratio_refined_deviation
        );
        assert!(rel.ratio_refined_deviation < rel.ratio_plain_deviation);
    }
}
