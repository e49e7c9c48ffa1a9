//! Integral-representation engine.
//!
//! The Kronecker δ fixing the number of α-particles is written as a phase
//! integral, which turns the multinomial sum into
//!
//! `C = √(N_α!N_β!/Π m_d!) · (1/2π)∫dφ e^{-iN_αφ} Π_d (c_α(d)e^{iφ} + c_β(d))^{m_d}`.
//!
//! The integrand is a trigonometric polynomial of degree ≤ N, so the
//! periodic rectangle rule on 4(N+1) uniform points is exact up to rounding.
//! Points are evaluated in half-angle form `Π_d (c_α z + c_β z̄)^{m_d} ·
//! z^{N_β-N_α}` with `z = e^{iφ/2}`, keeping only a slow residual phase
//! winding, and carried as mantissa × 2^exp so that powers up to `m_d = 140`
//! neither overflow nor underflow.

use num_complex::Complex64;

use crate::circuit::{detector_coefficients, CircuitConfig, DetectorSet};
use crate::numerics::ln_factorial;

use super::float::LogComplex;

/// Complex mantissa with a power-of-two exponent.
#[derive(Clone, Copy, Debug)]
struct ScaledComplex {
    m: Complex64,
    e: i64,
}

impl ScaledComplex {
    const ONE: ScaledComplex = ScaledComplex {
        m: Complex64::new(1.0, 0.0),
        e: 0,
    };

    fn from_complex(z: Complex64) -> Self {
        ScaledComplex { m: z, e: 0 }.renormed()
    }

    fn renormed(mut self) -> Self {
        let mag = self.m.re.abs().max(self.m.im.abs());
        if mag == 0.0 {
            return ScaledComplex {
                m: Complex64::new(0.0, 0.0),
                e: 0,
            };
        }
        if mag > 1.34e154 {
            // 2^512
            self.m *= 7.46e-155; // 2^-512
            self.e += 512;
        } else if mag < 7.46e-155 {
            self.m *= 1.34e154;
            self.e -= 512;
        }
        self
    }

    fn mul(&self, o: &ScaledComplex) -> Self {
        ScaledComplex {
            m: self.m * o.m,
            e: self.e + o.e,
        }
        .renormed()
    }

    fn powu(&self, mut k: u32) -> Self {
        let mut base = *self;
        let mut acc = ScaledComplex::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    fn is_zero(&self) -> bool {
        self.m.re == 0.0 && self.m.im == 0.0
    }

    fn ln_norm(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.m.norm().ln() + self.e as f64 * std::f64::consts::LN_2
        }
    }
}

/// Quadrature grid size for total particle number `n`: exact for the
/// degree-≤-n trigonometric integrands of the amplitude representation.
pub fn quadrature_points(n: u32) -> u32 {
    4 * (n + 1)
}

pub(crate) fn amplitude_integral_raw(
    config: &CircuitConfig,
    set: DetectorSet,
    counts: &[u32],
) -> LogComplex {
    let coeffs = detector_coefficients(config);
    let rows: Vec<(Complex64, Complex64, u32)> = set
        .detectors()
        .iter()
        .zip(counts)
        .filter(|(_, &m)| m > 0)
        .map(|(&d, &m)| {
            let (ca, cb) = coeffs.row(d);
            (ca, cb, m)
        })
        .collect();

    let n = config.total();
    let grid = quadrature_points(n);
    let winding = config.n_beta as i64 - config.n_alpha as i64;

    let mut points = Vec::with_capacity(grid as usize);
    for k in 0..grid {
        let phi = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / grid as f64;
        let half = Complex64::from_polar(1.0, 0.5 * phi);
        let mut point =
            ScaledComplex::from_complex(Complex64::from_polar(1.0, 0.5 * phi * winding as f64));
        for &(ca, cb, m) in &rows {
            let g = ca * half + cb * half.conj();
            point = point.mul(&ScaledComplex::from_complex(g).powu(m));
            if point.is_zero() {
                break;
            }
        }
        points.push(point);
    }

    let max_ln = points
        .iter()
        .map(ScaledComplex::ln_norm)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_ln == f64::NEG_INFINITY {
        return LogComplex::ZERO;
    }

    // Rescale to unit maximum and hand the grid to the shared periodic rule.
    let samples: Vec<Complex64> = points
        .iter()
        .map(|p| {
            if p.is_zero() {
                Complex64::new(0.0, 0.0)
            } else {
                p.m * (p.e as f64 * std::f64::consts::LN_2 - max_ln).exp()
            }
        })
        .collect();
    let mean = crate::numerics::integrate_periodic(&samples).expect("grid has 4(N+1) >= 4 points");
    if mean.norm() == 0.0 {
        return LogComplex::ZERO;
    }

    let mut ln_pref =
        0.5 * (ln_factorial(config.n_alpha as u64) + ln_factorial(config.n_beta as u64));
    for &m in counts {
        ln_pref -= 0.5 * ln_factorial(m as u64);
    }

    LogComplex {
        ln: ln_pref + max_ln + mean.norm().ln(),
        arg: mean.arg(),
    }
}
