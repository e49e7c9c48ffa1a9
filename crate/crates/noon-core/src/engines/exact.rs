//! Exact-rational amplitude evaluation.
//!
//! For the configurations the feedforward scheme actually uses — all phase
//! shifters at integer multiples of π/2 and a rational transmission
//! `T = p/q` — every detector coefficient is a Gaussian-rational multiple of
//! one of 1, √T, √R or 1/√2. Squared amplitudes are then exactly computable:
//! the radical scale factors square to rationals, and the multinomial sum
//! runs in the ring ℤ[i][s] with s² = pq (so √T = s/q lives in the ring).
//!
//! Detector rows whose coefficient pairs are proportional are merged before
//! enumeration; the binomials of the merged group collapse by the
//! Vandermonde identity, which is what makes exact evaluation at N = 140
//! affordable.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::circuit::{CircuitConfig, Detector, DetectorSet, ProbeArm};
use crate::numerics::{big_ln, factorial, ExactRational};

use super::float::LogComplex;

/// Element x + y·s of ℤ[i][s], with x, y Gaussian integers and s² = d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Ring {
    xr: BigInt,
    xi: BigInt,
    yr: BigInt,
    yi: BigInt,
}

impl Ring {
    pub fn zero() -> Self {
        Ring {
            xr: BigInt::zero(),
            xi: BigInt::zero(),
            yr: BigInt::zero(),
            yi: BigInt::zero(),
        }
    }

    pub fn one() -> Self {
        Ring::gauss(BigInt::one(), BigInt::zero())
    }

    pub fn gauss(re: BigInt, im: BigInt) -> Self {
        Ring {
            xr: re,
            xi: im,
            yr: BigInt::zero(),
            yi: BigInt::zero(),
        }
    }

    /// i^k
    pub fn unit(k: u8) -> Self {
        match k % 4 {
            0 => Ring::gauss(BigInt::one(), BigInt::zero()),
            1 => Ring::gauss(BigInt::zero(), BigInt::one()),
            2 => Ring::gauss(-BigInt::one(), BigInt::zero()),
            _ => Ring::gauss(BigInt::zero(), -BigInt::one()),
        }
    }

    /// i^k · s
    pub fn unit_s(k: u8) -> Self {
        let u = Ring::unit(k);
        Ring {
            xr: BigInt::zero(),
            xi: BigInt::zero(),
            yr: u.xr,
            yi: u.xi,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.xr.is_zero() && self.xi.is_zero() && self.yr.is_zero() && self.yi.is_zero()
    }

    pub fn neg(&self) -> Self {
        Ring {
            xr: -&self.xr,
            xi: -&self.xi,
            yr: -&self.yr,
            yi: -&self.yi,
        }
    }

    pub fn add(&self, o: &Ring) -> Self {
        Ring {
            xr: &self.xr + &o.xr,
            xi: &self.xi + &o.xi,
            yr: &self.yr + &o.yr,
            yi: &self.yi + &o.yi,
        }
    }

    pub fn add_assign(&mut self, o: &Ring) {
        self.xr += &o.xr;
        self.xi += &o.xi;
        self.yr += &o.yr;
        self.yi += &o.yi;
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Ring {
            xr: &self.xr * k,
            xi: &self.xi * k,
            yr: &self.yr * k,
            yi: &self.yi * k,
        }
    }

    pub fn mul(&self, o: &Ring, d: &BigInt) -> Self {
        // Gaussian products: (a+bi)(c+di) = (ac - bd) + (ad + bc)i
        let xx_r = &self.xr * &o.xr - &self.xi * &o.xi;
        let xx_i = &self.xr * &o.xi + &self.xi * &o.xr;
        let yy_r = &self.yr * &o.yr - &self.yi * &o.yi;
        let yy_i = &self.yr * &o.yi + &self.yi * &o.yr;
        let xy_r = &self.xr * &o.yr - &self.xi * &o.yi;
        let xy_i = &self.xr * &o.yi + &self.xi * &o.yr;
        let yx_r = &self.yr * &o.xr - &self.yi * &o.xi;
        let yx_i = &self.yr * &o.xi + &self.yi * &o.xr;
        Ring {
            xr: xx_r + d * yy_r,
            xi: xx_i + d * yy_i,
            yr: xy_r + yx_r,
            yi: xy_i + yx_i,
        }
    }

    pub fn pow(&self, mut k: u32, d: &BigInt) -> Self {
        let mut base = self.clone();
        let mut acc = Ring::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base, d);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base, d);
            }
        }
        acc
    }

    /// |x + y·s|² = (|x|² + d|y|²) + 2·Re(x·ȳ)·s, returned as (rational, √d
    /// coefficient).
    pub fn norm_sq(&self, d: &BigInt) -> (BigInt, BigInt) {
        let a = &self.xr * &self.xr
            + &self.xi * &self.xi
            + d * (&self.yr * &self.yr + &self.yi * &self.yi);
        let b = 2 * (&self.xr * &self.yr + &self.xi * &self.yi);
        (a, b)
    }

    /// Floating view x + y√d, as mantissa·2^exp to survive huge entries.
    pub fn to_complex_scaled(&self, d: &BigInt) -> (Complex64, i64) {
        let sqrt_d = d.to_f64().map(f64::sqrt).unwrap_or(f64::INFINITY);
        let parts = [&self.xr, &self.xi, &self.yr, &self.yi];
        let max_bits = parts.iter().map(|p| p.bits()).max().unwrap_or(0);
        let shift = max_bits.saturating_sub(900) as i64;
        let to_f = |x: &BigInt| -> f64 {
            let shifted = x >> shift;
            shifted.to_f64().unwrap_or(0.0)
        };
        let re = to_f(parts[0]) + sqrt_d * to_f(parts[2]);
        let im = to_f(parts[1]) + sqrt_d * to_f(parts[3]);
        (Complex64::new(re, im), shift)
    }
}

/// An exactly known real number `rational + radical_coeff·√radical_base`.
///
/// For the standard feedforward configurations the radical part of every
/// squared amplitude vanishes and the value is plainly rational.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactReal {
    pub rational: ExactRational,
    pub radical_coeff: ExactRational,
    pub radical_base: BigUint,
}

impl ExactReal {
    pub fn zero() -> Self {
        ExactReal {
            rational: ExactRational::zero(),
            radical_coeff: ExactRational::zero(),
            radical_base: BigUint::zero(),
        }
    }

    pub fn from_rational(r: ExactRational) -> Self {
        ExactReal {
            rational: r,
            radical_coeff: ExactRational::zero(),
            radical_base: BigUint::zero(),
        }
    }

    pub fn is_rational(&self) -> bool {
        self.radical_coeff.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.radical_coeff.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let sqrt_d = self.radical_base.to_f64().map(f64::sqrt).unwrap_or(0.0);
        crate::numerics::rational_to_f64(&self.rational)
            + crate::numerics::rational_to_f64(&self.radical_coeff) * sqrt_d
    }

    pub fn add_assign(&mut self, o: &ExactReal) {
        if o.is_zero() {
            return;
        }
        if self.is_zero() {
            *self = o.clone();
            return;
        }
        assert!(
            self.radical_coeff.is_zero()
                || o.radical_coeff.is_zero()
                || self.radical_base == o.radical_base,
            "cannot add exact reals over different radical bases"
        );
        if self.radical_base.is_zero() {
            self.radical_base = o.radical_base.clone();
        }
        self.rational += &o.rational;
        self.radical_coeff += &o.radical_coeff;
    }

    pub fn scale(&self, r: &ExactRational) -> ExactReal {
        ExactReal {
            rational: &self.rational * r,
            radical_coeff: &self.radical_coeff * r,
            radical_base: self.radical_base.clone(),
        }
    }
}

/// Exact amplitude: ring-valued multinomial sum plus radical scale factors
/// that square away in the probability.
#[derive(Clone, Debug)]
pub(crate) struct ExactAmp {
    pub w: Ring,
    pub d: BigInt,
    /// Product of the rational scale factors of all coefficient rows.
    pub scale: ExactRational,
    /// Exponent of 1/√2 collected from the rows.
    pub half_pow: u32,
    /// Exponent of √R collected from the rows.
    pub root_r_pow: u32,
    /// N_α! N_β! / Π m_d!
    pub pref_sq: ExactRational,
    /// R = 1 - T as an exact rational.
    pub reflection: ExactRational,
}

impl ExactAmp {
    pub fn probability(&self) -> ExactReal {
        let (a, b) = self.w.norm_sq(&self.d);
        let mut factor = &self.pref_sq * (&self.scale * &self.scale);
        if self.half_pow > 0 {
            factor *= ExactRational::new(BigInt::one(), BigInt::from(2u32).pow(self.half_pow));
        }
        for _ in 0..self.root_r_pow {
            factor *= &self.reflection;
        }
        ExactReal {
            rational: ExactRational::from(a) * &factor,
            radical_coeff: ExactRational::from(b) * factor,
            radical_base: self.d.to_biguint().expect("d >= 0"),
        }
    }

    /// ln|C| and phase of the amplitude (for phase-sensitive diagnostics).
    pub fn to_log_complex(&self) -> LogComplex {
        if self.w.is_zero() {
            return LogComplex::ZERO;
        }
        let (wc, shift) = self.w.to_complex_scaled(&self.d);
        if wc.norm_sqr() == 0.0 {
            return LogComplex::ZERO;
        }
        let ln_scale = big_ln(self.scale.numer()) - big_ln(self.scale.denom());
        let ln_pref = big_ln(self.pref_sq.numer()) - big_ln(self.pref_sq.denom());
        let ln_r = if self.root_r_pow == 0 {
            0.0
        } else if self.reflection.is_zero() {
            return LogComplex::ZERO;
        } else {
            (big_ln(self.reflection.numer()) - big_ln(self.reflection.denom()))
                * 0.5
                * self.root_r_pow as f64
        };
        LogComplex {
            ln: 0.5 * ln_pref + ln_scale - 0.5 * self.half_pow as f64 * std::f64::consts::LN_2
                + ln_r
                + wc.norm().ln()
                + shift as f64 * std::f64::consts::LN_2,
            arg: wc.arg(),
        }
    }
}

/// One detector row in exact form: `c = scale · 2^{-half/2} · R^{root_r/2} ·
/// (core_a, core_b)` with the cores in the ring.
#[derive(Clone, Debug)]
pub(crate) struct ExactRow {
    pub core_a: Ring,
    pub core_b: Ring,
    pub count: u32,
    pub scale: ExactRational,
    pub half_pow: u8,
    pub root_r: u8,
}

pub(crate) struct ExactContext {
    pub d: BigInt,
    pub reflection: ExactRational,
}

/// Build exact rows for the outcome's detectors, or `None` when the
/// configuration is not exactly representable (non-quarter-turn angles or a
/// floating transmission).
pub(crate) fn exact_rows(
    config: &CircuitConfig,
    set: DetectorSet,
    counts: &[u32],
) -> Option<(Vec<ExactRow>, ExactContext)> {
    let k_theta = config.theta.quarter_turns()?;
    let k_xi = config.xi.quarter_turns()?;
    let k_zeta = config.zeta.quarter_turns()?;
    let (p_raw, q_raw) = config.transmission.as_ratio()?;
    let k_chi = match (set, config.probe) {
        (DetectorSet::Probe789, Some(probe)) => Some(probe.chi.quarter_turns()?),
        (DetectorSet::Probe789, None) => return None,
        _ => None,
    };

    // Reduce T = p/q; the ring radical is s = √(pq).
    let g = gcd(p_raw, q_raw.max(1));
    let (p, q) = (p_raw / g, q_raw / g);
    let d = BigInt::from(p) * BigInt::from(q);
    let q_big = BigInt::from(q);
    let half = ExactRational::new(BigInt::one(), BigInt::from(2));
    let half_q = ExactRational::new(BigInt::one(), BigInt::from(2) * &q_big);
    let reflection = ExactRational::new(BigInt::from(q - p), q_big.clone());

    // c7 = u e^{iξ}/(2√2), c8 = v e^{iξ}.../(2√2) with q·u = s·i^{kζ} - q and
    // q·v = -i(s·i^{kζ} + q).
    let uq = Ring::unit_s(k_zeta).add(&Ring::gauss(-&q_big, BigInt::zero()));
    let vq = Ring::unit(1)
        .mul(
            &Ring::unit_s(k_zeta).add(&Ring::gauss(q_big.clone(), BigInt::zero())),
            &d,
        )
        .neg();

    let row = |detector: Detector, count: u32| -> ExactRow {
        match detector {
            Detector::D1 => ExactRow {
                core_a: Ring::unit(k_theta + 1),
                core_b: Ring::unit(2),
                count,
                scale: half.clone(),
                half_pow: 0,
                root_r: 0,
            },
            Detector::D2 => ExactRow {
                core_a: Ring::unit(k_theta + 2),
                core_b: Ring::unit(1),
                count,
                scale: half.clone(),
                half_pow: 0,
                root_r: 0,
            },
            Detector::D5 => ExactRow {
                core_a: Ring::unit(k_xi + 2),
                core_b: Ring::unit(1),
                count,
                scale: half.clone(),
                half_pow: 0,
                root_r: 0,
            },
            Detector::D5Prime => ExactRow {
                core_a: Ring::unit_s(k_zeta + k_xi + 3),
                core_b: Ring::unit_s(k_zeta + 2),
                count,
                scale: half_q.clone(),
                half_pow: 0,
                root_r: 0,
            },
            Detector::D6 => ExactRow {
                core_a: Ring::unit(k_xi + 1),
                core_b: Ring::unit(2),
                count,
                scale: half.clone(),
                half_pow: 0,
                root_r: 0,
            },
            Detector::D7 => ExactRow {
                core_a: uq.mul(&Ring::unit(k_xi), &d),
                core_b: vq.clone(),
                count,
                scale: half_q.clone(),
                half_pow: 1,
                root_r: 0,
            },
            Detector::D8 => ExactRow {
                core_a: vq.mul(&Ring::unit(k_xi), &d),
                core_b: uq.neg(),
                count,
                scale: half_q.clone(),
                half_pow: 1,
                root_r: 0,
            },
            Detector::D9 => ExactRow {
                core_a: Ring::unit(k_xi),
                core_b: Ring::unit(3),
                count,
                scale: half.clone(),
                half_pow: 0,
                root_r: 1,
            },
            Detector::P7 | Detector::P8 => {
                let k_chi = k_chi.expect("probe set checked above");
                let c7 = (uq.mul(&Ring::unit(k_xi), &d), vq.clone());
                let c8 = (vq.mul(&Ring::unit(k_xi), &d), uq.neg());
                let (c7, c8) = match config.probe.expect("probe present").arm {
                    ProbeArm::Arm7 => (
                        (
                            c7.0.mul(&Ring::unit(k_chi), &d),
                            c7.1.mul(&Ring::unit(k_chi), &d),
                        ),
                        c8,
                    ),
                    ProbeArm::Arm8 => (
                        c7,
                        (
                            c8.0.mul(&Ring::unit(k_chi), &d),
                            c8.1.mul(&Ring::unit(k_chi), &d),
                        ),
                    ),
                };
                let (core_a, core_b) = if detector == Detector::P7 {
                    (
                        c7.0.add(&c8.0.mul(&Ring::unit(1), &d)),
                        c7.1.add(&c8.1.mul(&Ring::unit(1), &d)),
                    )
                } else {
                    (
                        c7.0.mul(&Ring::unit(1), &d).add(&c8.0),
                        c7.1.mul(&Ring::unit(1), &d).add(&c8.1),
                    )
                };
                ExactRow {
                    core_a,
                    core_b,
                    count,
                    scale: half_q.clone(),
                    half_pow: 2,
                    root_r: 0,
                }
            }
        }
    };

    let rows = set
        .detectors()
        .iter()
        .zip(counts)
        .map(|(&det, &count)| row(det, count))
        .collect();
    Some((rows, ExactContext { d, reflection }))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// A merged enumeration group: proportional rows fold into one binomial via
/// the Vandermonde identity, with their units/radicals collected outside.
struct Group {
    base_a: Ring,
    base_b: Ring,
    total: u32,
    /// Product of per-row multipliers μ^{m_d} (ring units, possibly √T).
    multiplier: Ring,
}

fn merge_rows(rows: &[ExactRow], d: &BigInt) -> Vec<Group> {
    let mut groups: Vec<Group> = Vec::new();
    for row in rows {
        if row.count == 0 {
            continue;
        }
        // Proportional decomposition: (μ, μ) or (μ, -μ) merge onto the fixed
        // bases (1, 1) and (1, -1); anything else is its own group.
        let (base_a, base_b, mult) = if row.core_a == row.core_b {
            (Ring::one(), Ring::one(), row.core_a.clone())
        } else if row.core_a == row.core_b.neg() {
            (Ring::one(), Ring::one().neg(), row.core_a.clone())
        } else {
            (row.core_a.clone(), row.core_b.clone(), Ring::one())
        };
        let mult_pow = mult.pow(row.count, d);
        if let Some(g) = groups
            .iter_mut()
            .find(|g| g.base_a == base_a && g.base_b == base_b && !is_custom(&base_a, &base_b))
        {
            g.total += row.count;
            g.multiplier = g.multiplier.mul(&mult_pow, d);
        } else {
            groups.push(Group {
                base_a,
                base_b,
                total: row.count,
                multiplier: mult_pow,
            });
        }
    }
    groups
}

fn is_custom(base_a: &Ring, base_b: &Ring) -> bool {
    !(*base_a == Ring::one() && (*base_b == Ring::one() || *base_b == Ring::one().neg()))
}

/// Evaluate the multinomial sum exactly. `counts` are aligned with the
/// detector order of the outcome's set; conservation is the caller's duty.
pub(crate) fn amplitude_exact(
    config: &CircuitConfig,
    set: DetectorSet,
    counts: &[u32],
) -> Option<ExactAmp> {
    let (rows, ctx) = exact_rows(config, set, counts)?;
    let d = ctx.d.clone();

    let mut scale = ExactRational::one();
    let mut half_pow = 0u32;
    let mut root_r_pow = 0u32;
    for row in &rows {
        if row.count == 0 {
            continue;
        }
        for _ in 0..row.count {
            scale *= &row.scale;
        }
        half_pow += row.half_pow as u32 * row.count;
        root_r_pow += row.root_r as u32 * row.count;
    }

    let mut pref_sq = ExactRational::from(BigInt::from(factorial(config.n_alpha as u64)))
        * ExactRational::from(BigInt::from(factorial(config.n_beta as u64)));
    for &m in counts {
        pref_sq /= ExactRational::from(BigInt::from(factorial(m as u64)));
    }

    let groups = merge_rows(&rows, &d);
    let w = enumerate_exact(&groups, config.n_alpha, &d);

    let mut w_total = w;
    for g in &groups {
        w_total = w_total.mul(&g.multiplier, &d);
    }

    Some(ExactAmp {
        w: w_total,
        d,
        scale,
        half_pow,
        root_r_pow,
        pref_sq,
        reflection: ctx.reflection,
    })
}

/// Σ over {p_g: Σ p_g = N_α, 0 ≤ p_g ≤ M_g} of Π_g C(M_g, p_g)
/// base_a(g)^{p_g} base_b(g)^{M_g - p_g}.
fn enumerate_exact(groups: &[Group], n_alpha: u32, d: &BigInt) -> Ring {
    if groups.is_empty() {
        return if n_alpha == 0 {
            Ring::one()
        } else {
            Ring::zero()
        };
    }
    // Eliminate the group with the largest exponent through the δ-constraint.
    let elim = groups
        .iter()
        .enumerate()
        .max_by_key(|(_, g)| g.total)
        .map(|(i, _)| i)
        .unwrap();

    let table = |g: &Group| -> Vec<Ring> {
        let binoms = crate::numerics::binomial_row(g.total);
        let mut pow_a = Vec::with_capacity(g.total as usize + 1);
        let mut pow_b = Vec::with_capacity(g.total as usize + 1);
        let mut a = Ring::one();
        let mut b = Ring::one();
        for k in 0..=g.total {
            pow_a.push(a.clone());
            pow_b.push(b.clone());
            if k < g.total {
                a = a.mul(&g.base_a, d);
                b = b.mul(&g.base_b, d);
            }
        }
        (0..=g.total as usize)
            .map(|p| {
                pow_a[p]
                    .mul(&pow_b[g.total as usize - p], d)
                    .scale(&BigInt::from(binoms[p].clone()))
            })
            .collect()
    };

    let free: Vec<&Group> = groups
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != elim)
        .map(|(_, g)| g)
        .collect();
    let free_tables: Vec<Vec<Ring>> = free.iter().map(|g| table(g)).collect();
    let elim_table = table(&groups[elim]);
    let elim_max = groups[elim].total;

    // Suffix maxima for pruning the nested loops.
    let mut suffix_max = vec![elim_max; free.len() + 1];
    for i in (0..free.len()).rev() {
        suffix_max[i] = suffix_max[i + 1] + free[i].total;
    }
    if n_alpha > suffix_max[0] {
        return Ring::zero();
    }

    let mut walker = ExactWalker {
        free_tables: &free_tables,
        elim_table: &elim_table,
        elim_max,
        suffix_max: &suffix_max,
        n_alpha,
        d,
        partials: vec![Ring::one(); free.len() + 1],
        acc: Ring::zero(),
    };
    walker.recurse(0, 0);
    walker.acc
}

struct ExactWalker<'a> {
    free_tables: &'a [Vec<Ring>],
    elim_table: &'a [Ring],
    elim_max: u32,
    suffix_max: &'a [u32],
    n_alpha: u32,
    d: &'a BigInt,
    partials: Vec<Ring>,
    acc: Ring,
}

impl ExactWalker<'_> {
    fn recurse(&mut self, level: usize, used: u32) {
        if level == self.free_tables.len() {
            let rem = self.n_alpha - used;
            if rem <= self.elim_max {
                let term = self.partials[level].mul(&self.elim_table[rem as usize], self.d);
                self.acc.add_assign(&term);
            }
            return;
        }
        let remaining_capacity = self.suffix_max[level + 1];
        let lo = (self.n_alpha - used).saturating_sub(remaining_capacity);
        let hi = (self.free_tables[level].len() as u32 - 1).min(self.n_alpha - used);
        for p in lo..=hi {
            self.partials[level + 1] =
                self.partials[level].mul(&self.free_tables[level][p as usize], self.d);
            self.recurse(level + 1, used + p);
        }
    }
}
