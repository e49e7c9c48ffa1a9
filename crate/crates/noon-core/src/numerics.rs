//! Exact and floating-point combinatorial kernels shared by every engine.
//!
//! Two arithmetic backends coexist throughout the crate:
//!
//! * exact arbitrary-precision rationals ([`ExactRational`]), which are the
//!   ground truth for the alternating-sign multinomial sums, and
//! * sign/log-magnitude floats ([`LogMagnitude`]), which keep `N!`-sized
//!   factors representable up to `N = 140` and beyond without overflow.
//!
//! The periodic quadrature rule here integrates trigonometric polynomials
//! exactly as long as the grid has more points than the polynomial degree;
//! every integrand produced by the amplitude engines is of that form.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::sync::OnceLock;
use thiserror::Error;

/// Arbitrary-precision rational. Stored in lowest terms with a positive
/// denominator; closed under `+`, `-`, `*`, `/`.
pub type ExactRational = num_rational::BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumericsError {
    #[error("periodic quadrature needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

// Lanczos coefficients for g = 7, n = 9 (double precision set).
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos approximation).
///
/// Validated in the test suite against exact big-integer factorials.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx).
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

fn small_ln_factorials() -> &'static [f64; 171] {
    static TABLE: OnceLock<[f64; 171]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0_f64; 171];
        let mut fact = BigUint::one();
        for n in 1..=170u32 {
            fact *= n;
            // n! fits in f64 up to n = 170, so the conversion is exact to 1 ulp.
            table[n as usize] = fact.to_f64().expect("170! fits in f64").ln();
        }
        table
    })
}

/// ln(n!), accurate to at least 13 significant digits for `n <= 10^6`.
pub fn ln_factorial(n: u64) -> f64 {
    if n <= 170 {
        small_ln_factorials()[n as usize]
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// n! as an exact big integer.
pub fn factorial(n: u64) -> BigUint {
    let mut f = BigUint::one();
    for i in 2..=n {
        f *= i;
    }
    f
}

/// Binomial coefficient C(n, k) as an exact big integer.
///
/// Out-of-range `k` (negative or larger than `n`) yields 0, so callers can
/// use it directly inside constrained sums without bounds bookkeeping.
pub fn exact_binomial(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Row `n` of Pascal's triangle: `[C(n,0), ..., C(n,n)]`.
pub fn binomial_row(n: u32) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for k in 0..n as u64 {
        c = c * (n as u64 - k) / (k + 1);
        row.push(c.clone());
    }
    row
}

/// (1/2π)∫f dφ over one period, from uniform samples with identified
/// endpoints (the sample at φ = π is *not* repeated).
///
/// The rule is the periodic trapezoid/rectangle rule: exact for
/// trigonometric polynomials of degree below the sample count.
pub fn integrate_periodic(samples: &[Complex64]) -> Result<Complex64, NumericsError> {
    if samples.len() < 2 {
        return Err(NumericsError::TooFewSamples(samples.len()));
    }
    // Kahan compensation on both components; the engines feed grids of a few
    // hundred points where naive summation would already cost digits.
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for &v in samples {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum / samples.len() as f64)
}

/// A real number stored as sign and natural log of absolute value.
///
/// `sign == 0` is the conventional zero (`ln_abs` is then `-inf`).
/// Multiplication adds logs and multiplies signs, so products of `N!`-sized
/// factors stay representable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogMagnitude {
    sign: i8,
    ln_abs: f64,
}

impl LogMagnitude {
    pub const ZERO: LogMagnitude = LogMagnitude {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };
    pub const ONE: LogMagnitude = LogMagnitude {
        sign: 1,
        ln_abs: 0.0,
    };

    pub fn new(sign: i8, ln_abs: f64) -> Self {
        assert!(matches!(sign, -1..=1), "sign must be -1, 0 or +1");
        if sign == 0 {
            Self::ZERO
        } else {
            Self { sign, ln_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self {
                sign: if x < 0.0 { -1 } else { 1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn ln_abs(&self) -> f64 {
        self.ln_abs
    }

    pub fn to_f64(&self) -> f64 {
        self.sign as f64 * self.ln_abs.exp()
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::ZERO;
        }
        Self {
            sign: self.sign * other.sign,
            ln_abs: self.ln_abs + other.ln_abs,
        }
    }

    pub fn powi(&self, k: u32) -> Self {
        if self.sign == 0 {
            return if k == 0 { Self::ONE } else { Self::ZERO };
        }
        let sign = if self.sign < 0 && k % 2 == 1 { -1 } else { 1 };
        Self {
            sign,
            ln_abs: self.ln_abs * k as f64,
        }
    }
}

/// ln|x| of a big integer without overflowing f64 range.
pub fn big_ln(x: &BigInt) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let mag = x.abs().to_biguint().expect("abs value");
    let bits = mag.bits();
    if bits <= 1000 {
        mag.to_f64().expect("within f64 range").ln()
    } else {
        let shift = bits - 64;
        let head = (mag >> shift).to_f64().expect("64-bit head");
        head.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// f64 value of a big rational, scale-safe for huge numerators/denominators.
pub fn rational_to_f64(x: &ExactRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * (big_ln(x.numer()) - big_ln(x.denom())).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;
    use proptest::prelude::*;

    fn exact_factorial(n: u64) -> BigInt {
        let mut f = BigInt::one();
        for i in 2..=n {
            f *= i;
        }
        f
    }

    #[test]
    fn ln_factorial_trivial_values() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
    }

    #[test]
    fn ln_factorial_140_matches_exact_bigint() {
        // Independent oracle: exact 140! computed in big integers, then logged.
        let exact = big_ln(&exact_factorial(140));
        let got = ln_factorial(140);
        assert!(
            (got - exact).abs() / exact < 1e-9,
            "ln(140!) = {got}, oracle {exact}"
        );
        // Frozen oracle value.
        assert!((got - 555.220_294_146_894_8).abs() < 1e-8, "got {got}");
    }

    #[test]
    fn ln_factorial_agrees_with_exact_up_to_300() {
        for n in 0..=300u64 {
            let exact = big_ln(&exact_factorial(n));
            let got = ln_factorial(n);
            // ratio in [1 - 1e-10, 1 + 1e-10] ⇔ |Δ ln| ≲ 1e-10
            assert!(
                (got - exact).abs() <= 1e-10 * exact.abs().max(1.0),
                "n = {n}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn ln_gamma_half_integer() {
        // Γ(1/2) = √π
        let expect = 0.5 * std::f64::consts::PI.ln();
        assert!((ln_gamma(0.5) - expect).abs() < 1e-13);
        // Γ(3/2) = √π/2
        let expect = 0.5 * std::f64::consts::PI.ln() - std::f64::consts::LN_2;
        assert!((ln_gamma(1.5) - expect).abs() < 1e-13);
    }

    #[test]
    fn binomial_hand_values() {
        assert_eq!(exact_binomial(5, 2), BigUint::from(10u32));
        assert_eq!(exact_binomial(0, 0), BigUint::one());
        assert_eq!(exact_binomial(4, -1), BigUint::zero());
        assert_eq!(exact_binomial(4, 5), BigUint::zero());
    }

    #[test]
    fn binomial_140_70_matches_pascal_recurrence() {
        // Dynamic-programming Pascal triangle as the independent oracle.
        let mut row: Vec<BigUint> = vec![BigUint::one()];
        for n in 1..=140usize {
            let mut next = vec![BigUint::one(); n + 1];
            for k in 1..n {
                next[k] = &row[k - 1] + &row[k];
            }
            row = next;
        }
        assert_eq!(exact_binomial(140, 70), row[70]);
        for (k, expected) in row.iter().enumerate() {
            assert_eq!(&exact_binomial(140, k as i64), expected);
        }
    }

    #[test]
    fn binomial_row_matches_exact_binomial() {
        for n in [0u32, 1, 7, 40] {
            let row = binomial_row(n);
            for (k, v) in row.iter().enumerate() {
                assert_eq!(v, &exact_binomial(n as u64, k as i64));
            }
        }
    }

    #[test]
    fn pascal_identity_up_to_200() {
        for n in 2..=200u64 {
            for k in 1..n {
                let lhs = exact_binomial(n, k as i64);
                let rhs = exact_binomial(n - 1, k as i64 - 1) + exact_binomial(n - 1, k as i64);
                assert_eq!(lhs, rhs, "n={n} k={k}");
            }
        }
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / n as f64)
            .collect()
    }

    #[test]
    fn integrate_periodic_constant_is_one() {
        let samples = vec![Complex64::new(1.0, 0.0); 17];
        let v = integrate_periodic(&samples).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn integrate_periodic_fourier_orthogonality() {
        // e^{ikφ} integrates to δ_{k,0} exactly while |k| < number of samples.
        let n = 24;
        for k in -23i32..=23 {
            let samples: Vec<Complex64> = grid(n)
                .iter()
                .map(|&phi| Complex64::from_polar(1.0, k as f64 * phi))
                .collect();
            let v = integrate_periodic(&samples).unwrap();
            let expect = if k == 0 { 1.0 } else { 0.0 };
            assert!(
                (v - Complex64::new(expect, 0.0)).norm() < 1e-13,
                "k={k}, got {v}"
            );
        }
    }

    #[test]
    fn integrate_periodic_rejects_short_input() {
        assert_eq!(
            integrate_periodic(&[Complex64::new(1.0, 0.0)]),
            Err(NumericsError::TooFewSamples(1))
        );
    }

    proptest! {
        #[test]
        fn integrate_periodic_is_linear_and_shift_invariant(
            re in proptest::collection::vec(-1.0f64..1.0, 8..40),
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
            shift_seed in 0usize..1000,
        ) {
            let n = re.len();
            let f: Vec<Complex64> = re.iter().map(|&x| Complex64::new(x, -0.5 * x)).collect();
            let g: Vec<Complex64> = re.iter().rev().map(|&x| Complex64::new(0.3 * x, x)).collect();

            // Linearity: I(a f + b g) = a I(f) + b I(g)
            let combo: Vec<Complex64> = f.iter().zip(&g).map(|(&x, &y)| a * x + b * y).collect();
            let lhs = integrate_periodic(&combo).unwrap();
            let rhs = a * integrate_periodic(&f).unwrap() + b * integrate_periodic(&g).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12);

            // Cyclic shift invariance.
            let s = shift_seed % n;
            let shifted: Vec<Complex64> = (0..n).map(|i| f[(i + s) % n]).collect();
            let v0 = integrate_periodic(&f).unwrap();
            let v1 = integrate_periodic(&shifted).unwrap();
            prop_assert!((v0 - v1).norm() < 1e-13);
        }

        #[test]
        fn log_magnitude_multiplication(a in -1e3f64..1e3, b in -1e3f64..1e3) {
            let la = LogMagnitude::from_f64(a);
            let lb = LogMagnitude::from_f64(b);
            let prod = la.mul(&lb).to_f64();
            prop_assert!((prod - a * b).abs() <= 1e-10 * (a * b).abs().max(1e-300));
        }
    }

    #[test]
    fn log_magnitude_zero_and_powers() {
        assert!(LogMagnitude::from_f64(0.0).is_zero());
        assert!(LogMagnitude::ZERO.mul(&LogMagnitude::ONE).is_zero());
        let x = LogMagnitude::from_f64(-2.0);
        assert!((x.powi(3).to_f64() + 8.0).abs() < 1e-12);
        assert_eq!(x.powi(0).to_f64(), 1.0);
        // Large powers stay finite in log space: (1/2)^5000
        let tiny = LogMagnitude::from_f64(0.5).powi(5000);
        assert!(!tiny.is_zero());
        assert!((tiny.ln_abs() + 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn exact_rational_invariants() {
        let a = ExactRational::new(BigInt::from(4), BigInt::from(-6));
        // Stored in lowest terms with positive denominator.
        assert_eq!(a.numer(), &BigInt::from(-2));
        assert_eq!(a.denom(), &BigInt::from(3));
        let b = ExactRational::from_f64(0.125).unwrap();
        assert_eq!((&a + &b) - &b, a);
    }

    #[test]
    fn rational_to_f64_handles_huge_values() {
        let big = exact_factorial(150);
        let r = ExactRational::new(big.clone(), BigInt::one());
        let expect = big_ln(&big);
        assert!((rational_to_f64(&r).ln() - expect).abs() < 1e-9);
        let inv = ExactRational::new(BigInt::one(), big);
        assert!((rational_to_f64(&inv).ln() + expect).abs() < 1e-9);
    }
}
