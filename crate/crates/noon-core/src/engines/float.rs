//! Floating-point multinomial-sum engine.
//!
//! Terms are built in log-polar form so that `N!`-sized binomials stay
//! representable; the final accumulation runs at a common scale with Kahan
//! compensation. Proportional coefficient rows merge exactly as in the
//! exact engine.

use num_complex::Complex64;

use crate::circuit::{detector_coefficients, CircuitConfig, DetectorSet};
use crate::numerics::ln_factorial;

/// A complex number as `exp(ln)·e^{i·arg}`; zero is `ln = -inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogComplex {
    pub ln: f64,
    pub arg: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        ln: f64::NEG_INFINITY,
        arg: 0.0,
    };

    pub fn from_complex(z: Complex64) -> Self {
        let n = z.norm();
        if n == 0.0 {
            LogComplex::ZERO
        } else {
            LogComplex {
                ln: n.ln(),
                arg: z.arg(),
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    pub fn mul(&self, o: &LogComplex) -> LogComplex {
        if self.is_zero() || o.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex {
            ln: self.ln + o.ln,
            arg: self.arg + o.arg,
        }
    }

    pub fn powu(&self, k: u32) -> LogComplex {
        if self.is_zero() {
            return if k == 0 {
                LogComplex { ln: 0.0, arg: 0.0 }
            } else {
                LogComplex::ZERO
            };
        }
        LogComplex {
            ln: self.ln * k as f64,
            arg: self.arg * k as f64,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(self.ln.exp(), self.arg)
        }
    }

    /// |z|² in natural log.
    pub fn ln_norm_sqr(&self) -> f64 {
        2.0 * self.ln
    }
}

struct FloatGroup {
    c_alpha: Complex64,
    c_beta: Complex64,
    total: u32,
    /// ln/arg of the collected per-row multipliers μ^{m_d}.
    multiplier: LogComplex,
    /// Merged groups have scalar ±binomial tables.
    kind: GroupKind,
}

#[derive(PartialEq)]
enum GroupKind {
    PlusPlus,
    PlusMinus,
    Custom,
}

fn classify(c_alpha: Complex64, c_beta: Complex64) -> GroupKind {
    let scale = c_alpha.norm().max(c_beta.norm());
    if scale == 0.0 {
        return GroupKind::Custom;
    }
    if (c_alpha - c_beta).norm() <= 1e-13 * scale {
        GroupKind::PlusPlus
    } else if (c_alpha + c_beta).norm() <= 1e-13 * scale {
        GroupKind::PlusMinus
    } else {
        GroupKind::Custom
    }
}

/// Multinomial-sum amplitude in log-polar floating point.
///
/// `counts` align with `set.detectors()`; conservation is checked upstream.
pub(crate) fn amplitude_float(
    config: &CircuitConfig,
    set: DetectorSet,
    counts: &[u32],
) -> LogComplex {
    let coeffs = detector_coefficients(config);

    let mut groups: Vec<FloatGroup> = Vec::new();
    for (&det, &m) in set.detectors().iter().zip(counts) {
        if m == 0 {
            continue;
        }
        let (ca, cb) = coeffs.row(det);
        if ca.norm() == 0.0 && cb.norm() == 0.0 {
            // A dead detector (e.g. D9 at T = 1) with a nonzero count: the
            // whole amplitude vanishes.
            return LogComplex::ZERO;
        }
        let kind = classify(ca, cb);
        match kind {
            GroupKind::Custom => groups.push(FloatGroup {
                c_alpha: ca,
                c_beta: cb,
                total: m,
                multiplier: LogComplex { ln: 0.0, arg: 0.0 },
                kind,
            }),
            _ => {
                let mult = LogComplex::from_complex(ca).powu(m);
                if let Some(g) = groups.iter_mut().find(|g| g.kind == kind) {
                    g.total += m;
                    g.multiplier = g.multiplier.mul(&mult);
                } else {
                    groups.push(FloatGroup {
                        c_alpha: Complex64::new(1.0, 0.0),
                        c_beta: match kind {
                            GroupKind::PlusPlus => Complex64::new(1.0, 0.0),
                            _ => Complex64::new(-1.0, 0.0),
                        },
                        total: m,
                        multiplier: mult,
                        kind,
                    });
                }
            }
        }
    }

    let mut ln_pref =
        0.5 * (ln_factorial(config.n_alpha as u64) + ln_factorial(config.n_beta as u64));
    for &m in counts {
        ln_pref -= 0.5 * ln_factorial(m as u64);
    }
    let mut multiplier = LogComplex {
        ln: ln_pref,
        arg: 0.0,
    };
    for g in &groups {
        multiplier = multiplier.mul(&g.multiplier);
    }

    let sum = enumerate_float(&groups, config.n_alpha);
    multiplier.mul(&sum)
}

fn group_table(g: &FloatGroup) -> Vec<LogComplex> {
    let m = g.total;
    let ln_m = ln_factorial(m as u64);
    let la = LogComplex::from_complex(g.c_alpha);
    let lb = LogComplex::from_complex(g.c_beta);
    (0..=m)
        .map(|p| {
            let ln_binom = ln_m - ln_factorial(p as u64) - ln_factorial((m - p) as u64);
            let t = la.powu(p).mul(&lb.powu(m - p));
            LogComplex {
                ln: ln_binom + t.ln,
                arg: t.arg,
            }
        })
        .collect()
}

fn enumerate_float(groups: &[FloatGroup], n_alpha: u32) -> LogComplex {
    if groups.is_empty() {
        return if n_alpha == 0 {
            LogComplex { ln: 0.0, arg: 0.0 }
        } else {
            LogComplex::ZERO
        };
    }
    let elim = groups
        .iter()
        .enumerate()
        .max_by_key(|(_, g)| g.total)
        .map(|(i, _)| i)
        .unwrap();
    let free: Vec<&FloatGroup> = groups
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != elim)
        .map(|(_, g)| g)
        .collect();
    let free_tables: Vec<Vec<LogComplex>> = free.iter().map(|g| group_table(g)).collect();
    let elim_table = group_table(&groups[elim]);
    let elim_max = groups[elim].total;

    let mut suffix_max = vec![elim_max; free.len() + 1];
    for i in (0..free.len()).rev() {
        suffix_max[i] = suffix_max[i + 1] + free[i].total;
    }
    if n_alpha > suffix_max[0] {
        return LogComplex::ZERO;
    }

    // Pass 1: largest term magnitude, for a stable common scale.
    let mut max_ln = f64::NEG_INFINITY;
    visit(
        &free_tables,
        &elim_table,
        elim_max,
        &suffix_max,
        n_alpha,
        &mut |term: LogComplex| {
            if term.ln > max_ln {
                max_ln = term.ln;
            }
        },
    );
    if max_ln == f64::NEG_INFINITY {
        return LogComplex::ZERO;
    }

    // Pass 2: Kahan-compensated accumulation at the common scale.
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    visit(
        &free_tables,
        &elim_table,
        elim_max,
        &suffix_max,
        n_alpha,
        &mut |term: LogComplex| {
            if term.is_zero() {
                return;
            }
            let v = Complex64::from_polar((term.ln - max_ln).exp(), term.arg);
            let y = v - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        },
    );

    if sum.norm() == 0.0 {
        return LogComplex::ZERO;
    }
    LogComplex {
        ln: max_ln + sum.norm().ln(),
        arg: sum.arg(),
    }
}

struct FloatWalker<'a> {
    free_tables: &'a [Vec<LogComplex>],
    elim_table: &'a [LogComplex],
    elim_max: u32,
    suffix_max: &'a [u32],
    n_alpha: u32,
}

impl FloatWalker<'_> {
    fn recurse<F: FnMut(LogComplex)>(
        &self,
        level: usize,
        used: u32,
        partial: LogComplex,
        sink: &mut F,
    ) {
        if level == self.free_tables.len() {
            let rem = self.n_alpha - used;
            if rem <= self.elim_max {
                sink(partial.mul(&self.elim_table[rem as usize]));
            }
            return;
        }
        let table = &self.free_tables[level];
        let remaining = self.suffix_max[level + 1];
        let lo = (self.n_alpha - used).saturating_sub(remaining);
        let hi = (table.len() as u32 - 1).min(self.n_alpha - used);
        for p in lo..=hi {
            self.recurse(level + 1, used + p, partial.mul(&table[p as usize]), sink);
        }
    }
}

fn visit<F: FnMut(LogComplex)>(
    free_tables: &[Vec<LogComplex>],
    elim_table: &[LogComplex],
    elim_max: u32,
    suffix_max: &[u32],
    n_alpha: u32,
    sink: &mut F,
) {
    let walker = FloatWalker {
        free_tables,
        elim_table,
        elim_max,
        suffix_max,
        n_alpha,
    };
    walker.recurse(0, 0, LogComplex { ln: 0.0, arg: 0.0 }, sink);
}
