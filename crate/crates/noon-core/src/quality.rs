//! NOON quality factors over output count distributions.
//!
//! q₁ is twice the probability of finding no particles in one output arm;
//! q₂ is the variance-based factor 4Δ²m₇/m₇₈², maximal (= 1) for a perfect
//! NOON and 1/3 + O(1/m₇₈) for a flat distribution.

use serde::Serialize;
use thiserror::Error;

use crate::engines::OutcomeDistribution;

#[derive(Debug, Error, PartialEq)]
pub enum QualityError {
    #[error("q2 is undefined for an empty output pair (m78 = 0)")]
    EmptyPair,
}

/// Quality factors of one output distribution.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QualityReport {
    pub q1: f64,
    pub q2: f64,
    pub m78: u32,
    pub variance: f64,
}

/// q₁ = 2·P(m₇ = 0) on a normalized distribution. Reported raw: a
/// pathological distribution with P(0) > 1/2 yields q₁ > 1.
pub fn q1(dist: &OutcomeDistribution) -> f64 {
    2.0 * dist.probabilities.first().copied().unwrap_or(0.0)
}

/// q₂ = 4·Δ²m₇ / m₇₈².
pub fn q2(dist: &OutcomeDistribution) -> Result<f64, QualityError> {
    if dist.pair_total == 0 {
        return Err(QualityError::EmptyPair);
    }
    Ok(4.0 * dist.variance() / (dist.pair_total as f64).powi(2))
}

pub fn report(dist: &OutcomeDistribution) -> Result<QualityReport, QualityError> {
    Ok(QualityReport {
        q1: q1(dist),
        q2: q2(dist)?,
        m78: dist.pair_total,
        variance: dist.variance(),
    })
}

/// Quality factors straight from a probability table (used for averaged
/// distributions that are not produced by a single engine call).
pub fn report_from_probabilities(probabilities: &[f64]) -> Result<QualityReport, QualityError> {
    if probabilities.len() < 2 {
        return Err(QualityError::EmptyPair);
    }
    let m78 = probabilities.len() as u32 - 1;
    let mean: f64 = probabilities
        .iter()
        .enumerate()
        .map(|(i, p)| i as f64 * p)
        .sum();
    let variance: f64 = probabilities
        .iter()
        .enumerate()
        .map(|(i, p)| (i as f64 - mean).powi(2) * p)
        .sum();
    Ok(QualityReport {
        q1: 2.0 * probabilities[0],
        q2: 4.0 * variance / (m78 as f64).powi(2),
        m78,
        variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_noon_has_unit_qualities() {
        let mut p = vec![0.0; 21];
        p[0] = 0.5;
        p[20] = 0.5;
        let r = report_from_probabilities(&p).unwrap();
        assert!((r.q1 - 1.0).abs() < 1e-15);
        assert!((r.q2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_distribution_q2() {
        // Uniform over 0..=m78: variance m78(m78+2)/12, so q2 = 1/3 + 2/(3 m78).
        for m78 in [10usize, 100, 1000] {
            let p = vec![1.0 / (m78 as f64 + 1.0); m78 + 1];
            let r = report_from_probabilities(&p).unwrap();
            let expect = 1.0 / 3.0 + 2.0 / (3.0 * m78 as f64);
            assert!((r.q2 - expect).abs() < 1e-12, "m78={m78}: {}", r.q2);
        }
        // The flat distribution approaches q2 = 1/3 from above.
        let p = vec![1.0 / 1001.0; 1001];
        assert!((report_from_probabilities(&p).unwrap().q2 - 0.33).abs() < 0.005);
    }

    #[test]
    fn worst_case_two_center_spikes() {
        // P(m78/2 - 1) = P(m78/2 + 1) = 1/2: exactly q2 = 4/m78².
        for m78 in [10u32, 20, 50] {
            let mut p = vec![0.0; m78 as usize + 1];
            p[(m78 / 2 - 1) as usize] = 0.5;
            p[(m78 / 2 + 1) as usize] = 0.5;
            let r = report_from_probabilities(&p).unwrap();
            let expect = 4.0 / (m78 as f64).powi(2);
            assert!((r.q2 - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn q2_rejects_empty_pair() {
        assert_eq!(
            report_from_probabilities(&[1.0]).unwrap_err(),
            QualityError::EmptyPair
        );
    }

    proptest! {
        #[test]
        fn q2_bounds_and_reflection_invariance(
            raw in proptest::collection::vec(0.0f64..1.0, 3..40)
        ) {
            let total: f64 = raw.iter().sum();
            prop_assume!(total > 1e-6);
            let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let r = report_from_probabilities(&p).unwrap();
            // Variance bound: 0 ≤ q2 ≤ 1 for any normalized distribution.
            prop_assert!(r.q2 >= -1e-12 && r.q2 <= 1.0 + 1e-12);
            // Reflection m7 → m78 - m7 leaves q2 unchanged.
            let rev: Vec<f64> = p.iter().rev().copied().collect();
            let rr = report_from_probabilities(&rev).unwrap();
            prop_assert!((r.q2 - rr.q2).abs() < 1e-12);
            // For an exactly symmetric distribution q1 = 2 P(0) = 2 P(m78).
            let sym: Vec<f64> = p.iter().zip(p.iter().rev()).map(|(a, b)| 0.5 * (a + b)).collect();
            let rs = report_from_probabilities(&sym).unwrap();
            prop_assert!((rs.q1 - 2.0 * sym[sym.len() - 1]).abs() < 1e-12);
        }
    }
}
