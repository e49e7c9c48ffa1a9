//! Joint detection amplitudes and probabilities for the complete detector
//! sets, by three independent methods:
//!
//! * [`amplitude_sum`] — the multinomial sum with the δ-constraint
//!   eliminating one index; exact rationals when the configuration allows,
//!   log-space floats otherwise;
//! * [`amplitude_integral`] — the phase-integral representation on an
//!   exact-degree quadrature grid;
//! * [`oracle::oracle_probability`] — brute-force statevector evolution,
//!   guarded to small particle numbers.
//!
//! All prefactors are kept, so `|C|²` is an absolute probability and
//! unitarity (joint distributions summing to one) is a testable statement.

mod exact;
mod float;
mod integral;
pub mod oracle;

pub use exact::ExactReal;
pub use float::LogComplex;
pub use integral::quadrature_points;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use crate::circuit::{CircuitConfig, Detector, DetectorSet};
use crate::numerics::{ExactRational, NumericsError};
use thiserror::Error;

/// Probabilities below this magnitude are flushed to zero in float mode.
pub const FLUSH_THRESHOLD_LN: f64 = -300.0 * std::f64::consts::LN_10;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("outcome counts sum to {got} but the sources carry {expected} particles")]
    NonConserving { expected: u32, got: u32 },
    #[error("outcome detectors do not match set {0:?}")]
    BadOutcome(DetectorSet),
    #[error(
        "configuration is not exactly representable (quarter-turn phases and rational T required)"
    )]
    ExactUnavailable,
    #[error("total particle number {total} exceeds the oracle cost guard {max}")]
    CostGuard { total: u32, max: u32 },
    #[error("empty outcome support under the given conditioning")]
    EmptySupport,
    #[error("probe detector set requires a probe stage in the configuration")]
    MissingProbe,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Largest total particle number for which the float path evaluates the
/// literal multinomial sum. The alternating-sign sums lose digits linearly
/// in N; beyond this point the float engine evaluates the mathematically
/// identical integral representation instead, which stays conditioned.
pub const FLOAT_SUM_MAX_TOTAL: u32 = 40;

/// Which amplitude engine evaluates a distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineKind {
    /// Exact rationals; errors when the configuration is not representable.
    Exact,
    /// Floating point: the log-space multinomial sum up to
    /// [`FLOAT_SUM_MAX_TOTAL`] particles, the quadrature form beyond.
    Float,
    /// Quadrature over the integral representation.
    Integral,
}

/// An assignment of particle counts to the detectors of one complete set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectionOutcome {
    set: DetectorSet,
    counts: Vec<u32>,
}

impl DetectionOutcome {
    /// Counts must mention every detector of the set exactly once.
    pub fn new(set: DetectorSet, assignment: &[(Detector, u32)]) -> Result<Self, EngineError> {
        let detectors = set.detectors();
        if assignment.len() != detectors.len() {
            return Err(EngineError::BadOutcome(set));
        }
        let mut counts = vec![u32::MAX; detectors.len()];
        for &(d, m) in assignment {
            match detectors.iter().position(|&x| x == d) {
                Some(i) if counts[i] == u32::MAX => counts[i] = m,
                _ => return Err(EngineError::BadOutcome(set)),
            }
        }
        Ok(DetectionOutcome { set, counts })
    }

    pub fn from_counts(set: DetectorSet, counts: Vec<u32>) -> Result<Self, EngineError> {
        if counts.len() != set.detectors().len() {
            return Err(EngineError::BadOutcome(set));
        }
        Ok(DetectionOutcome { set, counts })
    }

    pub fn set(&self) -> DetectorSet {
        self.set
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, d: Detector) -> Option<u32> {
        self.set
            .detectors()
            .iter()
            .position(|&x| x == d)
            .map(|i| self.counts[i])
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    fn check_conservation(&self, config: &CircuitConfig) -> Result<(), EngineError> {
        let expected = config.total();
        let got = self.total();
        if expected != got {
            return Err(EngineError::NonConserving { expected, got });
        }
        if self.set == DetectorSet::Probe789 && config.probe.is_none() {
            return Err(EngineError::MissingProbe);
        }
        Ok(())
    }
}

/// A detection amplitude: log-polar float view, plus the exact squared
/// magnitude when the exact engine produced it.
#[derive(Clone, Debug)]
pub struct Amplitude {
    log: LogComplex,
    exact: Option<ExactReal>,
}

impl Amplitude {
    pub fn to_complex(&self) -> Complex64 {
        self.log.to_complex()
    }

    pub fn log(&self) -> LogComplex {
        self.log
    }

    /// |C|² with the documented underflow flush in float mode.
    pub fn probability(&self) -> (f64, bool) {
        if let Some(e) = &self.exact {
            return (e.to_f64(), false);
        }
        let ln_p = self.log.ln_norm_sqr();
        if ln_p == f64::NEG_INFINITY {
            (0.0, false)
        } else if ln_p < FLUSH_THRESHOLD_LN {
            (0.0, true)
        } else {
            (ln_p.exp(), false)
        }
    }

    pub fn exact_probability(&self) -> Option<&ExactReal> {
        self.exact.as_ref()
    }
}

/// Multinomial-sum amplitude; exact when the configuration allows, else the
/// log-space float path. For large-N distributions prefer [`EngineKind::Float`],
/// which switches to the stable quadrature evaluation past
/// [`FLOAT_SUM_MAX_TOTAL`] particles.
pub fn amplitude_sum(
    config: &CircuitConfig,
    outcome: &DetectionOutcome,
) -> Result<Amplitude, EngineError> {
    outcome.check_conservation(config)?;
    if let Some(exact) = exact::amplitude_exact(config, outcome.set, &outcome.counts) {
        Ok(Amplitude {
            log: exact.to_log_complex(),
            exact: Some(exact.probability()),
        })
    } else {
        Ok(Amplitude {
            log: float::amplitude_float(config, outcome.set, &outcome.counts),
            exact: None,
        })
    }
}

/// Multinomial-sum amplitude, forcing the float path.
pub fn amplitude_sum_float(
    config: &CircuitConfig,
    outcome: &DetectionOutcome,
) -> Result<Amplitude, EngineError> {
    outcome.check_conservation(config)?;
    Ok(Amplitude {
        log: float::amplitude_float(config, outcome.set, &outcome.counts),
        exact: None,
    })
}

/// Multinomial-sum amplitude, exact or an error.
pub fn amplitude_sum_exact(
    config: &CircuitConfig,
    outcome: &DetectionOutcome,
) -> Result<Amplitude, EngineError> {
    outcome.check_conservation(config)?;
    match exact::amplitude_exact(config, outcome.set, &outcome.counts) {
        Some(exact) => Ok(Amplitude {
            log: exact.to_log_complex(),
            exact: Some(exact.probability()),
        }),
        None => Err(EngineError::ExactUnavailable),
    }
}

/// Integral-representation amplitude on the exact-degree quadrature grid.
pub fn amplitude_integral(
    config: &CircuitConfig,
    outcome: &DetectionOutcome,
) -> Result<Amplitude, EngineError> {
    outcome.check_conservation(config)?;
    Ok(Amplitude {
        log: integral::amplitude_integral_raw(config, outcome.set, &outcome.counts),
        exact: None,
    })
}

/// Statevector-oracle probability (see [`oracle`]).
pub fn statevector_oracle(
    config: &CircuitConfig,
    outcome: &DetectionOutcome,
) -> Result<f64, EngineError> {
    outcome.check_conservation(config)?;
    oracle::oracle_probability(config, outcome.set, &outcome.counts)
}

pub fn amplitude(
    config: &CircuitConfig,
    outcome: &DetectionOutcome,
    kind: EngineKind,
) -> Result<Amplitude, EngineError> {
    match kind {
        EngineKind::Exact => amplitude_sum_exact(config, outcome),
        EngineKind::Float if config.total() <= FLOAT_SUM_MAX_TOTAL => {
            amplitude_sum_float(config, outcome)
        }
        EngineKind::Float => amplitude_integral(config, outcome),
        EngineKind::Integral => amplitude_integral(config, outcome),
    }
}

/// A normalized probability table over one free detector count, with its
/// conditioning record and the unnormalized totals.
#[derive(Clone, Debug)]
pub struct OutcomeDistribution {
    pub set: DetectorSet,
    pub conditioning: Vec<(Detector, u32)>,
    pub free: Detector,
    /// The detector whose count balances conservation for each free value;
    /// `None` when it was summed out instead.
    pub balance: Option<Detector>,
    /// Largest possible free count (= N minus the conditioned counts).
    pub pair_total: u32,
    /// Unnormalized |C|² per free value 0..=pair_total.
    pub absolute: Vec<f64>,
    /// Normalized probabilities.
    pub probabilities: Vec<f64>,
    /// Σ of `absolute`: the absolute probability of the conditioning.
    pub total_absolute: f64,
    /// Exact values when the exact engine ran.
    pub exact_absolute: Option<Vec<ExactReal>>,
    /// Whether any float-mode probability was flushed to zero.
    pub flushed: bool,
}

impl OutcomeDistribution {
    pub fn support(&self) -> impl Iterator<Item = u32> {
        0..=self.pair_total
    }

    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| i as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| (i as f64 - mean).powi(2) * p)
            .sum()
    }

    pub fn mode(&self) -> u32 {
        self.probabilities
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i as u32)
            .unwrap_or(0)
    }

    /// Exact mean of the free count, available when every exact value is
    /// plainly rational (true for all standard configurations).
    pub fn exact_mean(&self) -> Option<ExactRational> {
        let exact = self.exact_absolute.as_ref()?;
        if !exact.iter().all(ExactReal::is_rational) {
            return None;
        }
        let mut num = ExactRational::from_integer(0.into());
        let mut den = ExactRational::from_integer(0.into());
        for (i, v) in exact.iter().enumerate() {
            num += &v.rational * ExactRational::from_integer(i.into());
            den += &v.rational;
        }
        if den == ExactRational::from_integer(0.into()) {
            None
        } else {
            Some(num / den)
        }
    }

    /// CSV with a `free,probability` header row.
    pub fn csv_string(&self) -> String {
        let mut out = format!("{},probability\n", self.free);
        for (i, p) in self.probabilities.iter().enumerate() {
            out.push_str(&format!("{i},{p:.17e}\n"));
        }
        out
    }

    /// JSON record: conditioning, free variable, normalized and absolute
    /// probabilities, and exact numerator/denominator strings on demand.
    pub fn json_value(&self, with_exact: bool) -> serde_json::Value {
        let conditioning: Vec<serde_json::Value> = self
            .conditioning
            .iter()
            .map(|(d, m)| json!({ "detector": d.to_string(), "count": m }))
            .collect();
        let mut value = json!({
            "set": format!("{:?}", self.set),
            "conditioning": conditioning,
            "free": self.free.to_string(),
            "pair_total": self.pair_total,
            "probabilities": self.probabilities,
            "absolute": self.absolute,
            "total_absolute": self.total_absolute,
            "flushed": self.flushed,
        });
        if with_exact {
            if let Some(exact) = &self.exact_absolute {
                let rows: Vec<serde_json::Value> = exact
                    .iter()
                    .map(|e| {
                        if e.is_rational() {
                            json!(format!("{}/{}", e.rational.numer(), e.rational.denom()))
                        } else {
                            json!({
                                "rational": format!("{}/{}", e.rational.numer(), e.rational.denom()),
                                "radical_coeff": format!("{}/{}", e.radical_coeff.numer(), e.radical_coeff.denom()),
                                "radical_base": e.radical_base.to_string(),
                            })
                        }
                    })
                    .collect();
                value["exact_absolute"] = json!(rows);
            }
        }
        value
    }
}

fn outcome_for(
    set: DetectorSet,
    fixed: &[(Detector, u32)],
    free: Detector,
    free_value: u32,
    balance: Detector,
    balance_value: u32,
) -> DetectionOutcome {
    let counts: Vec<u32> = set
        .detectors()
        .iter()
        .map(|&d| {
            if d == free {
                free_value
            } else if d == balance {
                balance_value
            } else {
                fixed
                    .iter()
                    .find(|&&(fd, _)| fd == d)
                    .map(|&(_, m)| m)
                    .unwrap()
            }
        })
        .collect();
    DetectionOutcome { set, counts }
}

/// Conditional distribution over `free`, with all other detectors of the set
/// fixed except the one remaining detector, whose count balances
/// conservation.
pub fn conditional_distribution(
    config: &CircuitConfig,
    set: DetectorSet,
    fixed: &[(Detector, u32)],
    free: Detector,
    kind: EngineKind,
) -> Result<OutcomeDistribution, EngineError> {
    let detectors = set.detectors();
    if !detectors.contains(&free)
        || fixed
            .iter()
            .any(|&(d, _)| d == free || !detectors.contains(&d))
    {
        return Err(EngineError::BadOutcome(set));
    }
    let mut rest: Vec<Detector> = detectors
        .iter()
        .copied()
        .filter(|&d| d != free && !fixed.iter().any(|&(fd, _)| fd == d))
        .collect();
    if rest.len() != 1 {
        return Err(EngineError::BadOutcome(set));
    }
    let balance = rest.pop().unwrap();

    let fixed_total: u32 = fixed.iter().map(|&(_, m)| m).sum();
    if fixed_total > config.total() {
        return Err(EngineError::EmptySupport);
    }
    let pair_total = config.total() - fixed_total;

    let amps: Result<Vec<Amplitude>, EngineError> = (0..=pair_total)
        .into_par_iter()
        .map(|m| {
            let outcome = outcome_for(set, fixed, free, m, balance, pair_total - m);
            amplitude(config, &outcome, kind)
        })
        .collect();
    let amps = amps?;

    assemble_distribution(set, fixed.to_vec(), free, Some(balance), pair_total, amps)
}

/// Distribution over `free` with the `summed` detector integrated out; the
/// remaining detector balances conservation inside the inner sum.
pub fn summed_distribution(
    config: &CircuitConfig,
    set: DetectorSet,
    fixed: &[(Detector, u32)],
    free: Detector,
    summed: Detector,
    kind: EngineKind,
) -> Result<OutcomeDistribution, EngineError> {
    let detectors = set.detectors();
    let mut rest: Vec<Detector> = detectors
        .iter()
        .copied()
        .filter(|&d| d != free && d != summed && !fixed.iter().any(|&(fd, _)| fd == d))
        .collect();
    if rest.len() != 1 || !detectors.contains(&free) || !detectors.contains(&summed) {
        return Err(EngineError::BadOutcome(set));
    }
    let balance = rest.pop().unwrap();
    let fixed_total: u32 = fixed.iter().map(|&(_, m)| m).sum();
    if fixed_total > config.total() {
        return Err(EngineError::EmptySupport);
    }
    let pair_total = config.total() - fixed_total;

    let per_free: Result<Vec<(f64, Option<ExactReal>, bool)>, EngineError> = (0..=pair_total)
        .into_par_iter()
        .map(|m_free| {
            let mut abs = 0.0;
            let mut exact: Option<ExactReal> = match kind {
                EngineKind::Exact => Some(ExactReal::zero()),
                _ => None,
            };
            let mut flushed = false;
            for m_sum in 0..=(pair_total - m_free) {
                let mut fixed_inner = fixed.to_vec();
                fixed_inner.push((summed, m_sum));
                let outcome = outcome_for(
                    set,
                    &fixed_inner,
                    free,
                    m_free,
                    balance,
                    pair_total - m_free - m_sum,
                );
                let amp = amplitude(config, &outcome, kind)?;
                let (p, fl) = amp.probability();
                abs += p;
                flushed |= fl;
                if let (Some(acc), Some(e)) = (exact.as_mut(), amp.exact_probability()) {
                    acc.add_assign(e);
                }
            }
            Ok((abs, exact, flushed))
        })
        .collect();
    let per_free = per_free?;

    let absolute: Vec<f64> = per_free.iter().map(|(p, _, _)| *p).collect();
    let exact_absolute = if kind == EngineKind::Exact {
        Some(
            per_free
                .iter()
                .map(|(_, e, _)| e.clone().unwrap())
                .collect(),
        )
    } else {
        None
    };
    let flushed = per_free.iter().any(|(_, _, f)| *f);
    let total_absolute: f64 = absolute.iter().sum();
    let probabilities = normalize(&absolute, total_absolute);
    Ok(OutcomeDistribution {
        set,
        conditioning: fixed.to_vec(),
        free,
        balance: None,
        pair_total,
        absolute,
        probabilities,
        total_absolute,
        exact_absolute,
        flushed,
    })
}

fn assemble_distribution(
    set: DetectorSet,
    conditioning: Vec<(Detector, u32)>,
    free: Detector,
    balance: Option<Detector>,
    pair_total: u32,
    amps: Vec<Amplitude>,
) -> Result<OutcomeDistribution, EngineError> {
    let mut flushed = false;
    let absolute: Vec<f64> = amps
        .iter()
        .map(|a| {
            let (p, f) = a.probability();
            flushed |= f;
            p
        })
        .collect();
    let exact_absolute = if amps.iter().all(|a| a.exact.is_some()) {
        Some(amps.iter().map(|a| a.exact.clone().unwrap()).collect())
    } else {
        None
    };
    let total_absolute: f64 = absolute.iter().sum();
    let probabilities = normalize(&absolute, total_absolute);
    Ok(OutcomeDistribution {
        set,
        conditioning,
        free,
        balance,
        pair_total,
        absolute,
        probabilities,
        total_absolute,
        exact_absolute,
        flushed,
    })
}

fn normalize(absolute: &[f64], total: f64) -> Vec<f64> {
    if total > 0.0 {
        absolute.iter().map(|p| p / total).collect()
    } else {
        vec![0.0; absolute.len()]
    }
}

/// Exhaustive conserving outcomes of a set: all count vectors summing to N.
pub fn enumerate_outcomes(set: DetectorSet, n: u32) -> Vec<Vec<u32>> {
    let k = set.detectors().len();
    let mut out = Vec::new();
    let mut current = vec![0u32; k];
    fn rec(current: &mut Vec<u32>, idx: usize, left: u32, out: &mut Vec<Vec<u32>>) {
        if idx + 1 == current.len() {
            current[idx] = left;
            out.push(current.clone());
            return;
        }
        for v in 0..=left {
            current[idx] = v;
            rec(current, idx + 1, left - v, out);
        }
    }
    rec(&mut current, 0, n, &mut out);
    out
}

#[cfg(test)]
mod tests;
