//! Phase-state distributions and peak analysis.
//!
//! A side detection of (m₁, m₂) particles leaves the remaining particles in
//! a superposition of two phase states whose relative-phase profile is
//! Q₁₂(φ) = (cos φ/2)^{m₁}(sin φ/2)^{m₂}, peaked at ±φ₀ with
//! φ₀ = 2 arctan √(m₂/m₁). With the D9 stage, the profile picks up the m₉
//! exponent and the Q₈ factor; the product peaks where a cubic in
//! X = tan(φ/2) vanishes, and demanding that the m₇ factor vanish at that
//! peak fixes the exact transmission condition.

use num_bigint::BigInt;
use thiserror::Error;

use crate::numerics::ExactRational;

#[derive(Debug, Error, PartialEq)]
pub enum PhaseError {
    #[error("peak phase needs m1 > 0 or m2 > 0")]
    NoCounts,
    #[error("exact transmission denominator must be positive (N + m1 - m2 + m9 = {0})")]
    BadDenominator(i64),
    #[error("no nonnegative real root of the peak cubic (coefficients {0:?})")]
    NoPhysicalRoot([f64; 4]),
}

/// Q₁₂(φ) = (cos φ/2)^{m₁} (sin φ/2)^{m₂}
pub fn q12(phi: f64, m1: u32, m2: u32) -> f64 {
    (0.5 * phi).cos().powi(m1 as i32) * (0.5 * phi).sin().powi(m2 as i32)
}

/// Q₁₂₉(φ) = (cos φ/2)^{m₁+m₉} (sin φ/2)^{m₂}
pub fn q129(phi: f64, m1: u32, m2: u32, m9: u32) -> f64 {
    q12(phi, m1 + m9, m2)
}

/// Q₈(φ) = (√T cos φ/2 + sin φ/2)^{m₈}
pub fn q8(phi: f64, m8: u32, transmission: f64) -> f64 {
    (transmission.sqrt() * (0.5 * phi).cos() + (0.5 * phi).sin()).powi(m8 as i32)
}

/// Δ(φ) = √T cos φ/2 - sin φ/2, the per-particle m₇ factor: making it vanish
/// at the profile peak is the correction condition.
pub fn delta(phi: f64, transmission: f64) -> f64 {
    transmission.sqrt() * (0.5 * phi).cos() - (0.5 * phi).sin()
}

/// Positive peak location of Q₁₂: φ₀ = 2 arctan √(m₂/m₁) ∈ [0, π].
///
/// The m₁ = 0 limit returns π (all weight at the antidiagonal).
pub fn peak_phase(m1: u32, m2: u32) -> Result<f64, PhaseError> {
    match (m1, m2) {
        (0, 0) => Err(PhaseError::NoCounts),
        (0, _) => Ok(std::f64::consts::PI),
        (_, m2) => Ok(2.0 * ((m2 as f64 / m1 as f64).sqrt()).atan()),
    }
}

/// The two-δ-spike approximation of Q₁₂ used for physical analysis only:
/// weights at ±φ₀ with the (-1)^{m₂} parity sign on the negative peak.
pub fn delta_spike_approximation(m1: u32, m2: u32) -> Result<[(f64, f64); 2], PhaseError> {
    let phi0 = peak_phase(m1, m2)?;
    let sign = if m2.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok([(phi0, 1.0), (-phi0, sign)])
}

/// Coefficients (a, b, c, d) of the peak cubic
/// a·X³ + b·X² + c·X + d with X = tan(φ/2):
/// (m₁+m₉)X³ + √T(m₁+m₉+m₇₈)X² - (m₂+m₇₈)X - m₂√T = 0.
fn cubic_coefficients(m1: u32, m2: u32, m9: u32, m78: u32, transmission: f64) -> [f64; 4] {
    let st = transmission.sqrt();
    [
        (m1 + m9) as f64,
        st * (m1 + m9 + m78) as f64,
        -((m2 + m78) as f64),
        -(m2 as f64) * st,
    ]
}

fn cubic_eval(c: &[f64; 4], x: f64) -> f64 {
    ((c[0] * x + c[1]) * x + c[2]) * x + c[3]
}

/// Peak location φ_m of Q₁₂₉·Q₈ via the unique nonnegative root of the
/// cubic; at m₂ = 0 the spurious X = 0 root is skipped in favour of the
/// strictly positive one.
///
/// The root is isolated by sign changes on a fine grid and refined by
/// bisection, which is robust near double roots; uniqueness of the
/// nonnegative root is asserted rather than assumed.
pub fn corrected_peak(
    m1: u32,
    m2: u32,
    m9: u32,
    m78: u32,
    transmission: f64,
) -> Result<f64, PhaseError> {
    if m1 + m9 == 0 {
        return Err(PhaseError::NoCounts);
    }
    let coeffs = cubic_coefficients(m1, m2, m9, m78, transmission);
    // All roots X ≥ 0 lie below 1 + max|c_i|/c_3.
    let bound = 1.0 + (coeffs[1].abs() + coeffs[2].abs() + coeffs[3].abs()) / coeffs[0];
    let samples = 4096;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_x = 0.0;
    let mut prev_f = cubic_eval(&coeffs, 0.0);
    if prev_f == 0.0 && m2 == 0 {
        // The X = 0 root: only physical when m₂ = 0 forces the peak to φ = 0
        // and there is no positive root; recorded, possibly replaced below.
        roots.push(0.0);
    }
    for k in 1..=samples {
        let x = bound * k as f64 / samples as f64;
        let f = cubic_eval(&coeffs, x);
        if (prev_f < 0.0 && f >= 0.0) || (prev_f > 0.0 && f <= 0.0) {
            let (mut lo, mut hi) = (prev_x, x);
            let mut flo = prev_f;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = cubic_eval(&coeffs, mid);
                if (flo <= 0.0) == (fm <= 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_x = x;
        prev_f = f;
    }
    let positive: Vec<f64> = roots.iter().copied().filter(|&r| r > 1e-12).collect();
    let root = match positive.len() {
        0 => {
            if roots.contains(&0.0) {
                0.0
            } else {
                return Err(PhaseError::NoPhysicalRoot(coeffs));
            }
        }
        1 => positive[0],
        _ => return Err(PhaseError::NoPhysicalRoot(coeffs)),
    };
    Ok(2.0 * root.atan())
}

/// The exact-condition transmission of the correction circuit:
/// T = (N - (m₁ - m₂ + m₉)) / (N + (m₁ - m₂ + m₉)).
///
/// Callers must verify T ≤ 1 themselves; it is guaranteed when m₁ > m₂.
pub fn exact_transmission(n: u32, m1: u32, m2: u32, m9: u32) -> Result<ExactRational, PhaseError> {
    let k = m1 as i64 - m2 as i64 + m9 as i64;
    let den = n as i64 + k;
    if den <= 0 {
        return Err(PhaseError::BadDenominator(den));
    }
    Ok(ExactRational::new(
        BigInt::from(n as i64 - k),
        BigInt::from(den),
    ))
}

/// The cubic evaluated symbolically at X = √T: the value is
/// √T·[(m₁+m₉)T + (m₁+m₉+m₇₈)T - (m₂+m₇₈) - m₂], returned as the exact
/// rational bracket. It vanishes identically when T satisfies the exact
/// transmission condition.
pub fn cubic_at_sqrt_t(m1: u32, m2: u32, m9: u32, m78: u32, t: &ExactRational) -> ExactRational {
    let a = ExactRational::from(BigInt::from(m1 + m9));
    let b = ExactRational::from(BigInt::from(m1 + m9 + m78));
    let c = ExactRational::from(BigInt::from(m2 + m78));
    let d = ExactRational::from(BigInt::from(m2));
    (&a + &b) * t - c - d
}

/// Samples of a φ-profile on a uniform grid over [-π, π], for CSV export.
pub fn sample_profile(f: impl Fn(f64) -> f64, samples: usize) -> Vec<(f64, f64)> {
    (0..=samples)
        .map(|k| {
            let phi =
                -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
            (phi, f(phi))
        })
        .collect()
}
