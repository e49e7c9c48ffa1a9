//! The interferometer layout and the linear coefficients of every detector
//! operator.
//!
//! Each detector mode is a fixed linear combination of the two source modes,
//! `a_d = c_α(d)·a_α + c_β(d)·a_β`. Tracing back through the beam splitters
//! and the phase shifters θ, ξ, ζ and the D9 splitter of transmission `T`
//! gives the coefficient table produced by [`detector_coefficients`].
//!
//! Angles that are exact quarter turns are kept symbolic ([`Angle::Quarter`])
//! so the exact-rational amplitude engine can recognise configurations whose
//! coefficients live in a radical extension of the Gaussian rationals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("cannot parse angle from {0:?} (use radians or \"pi/2\", \"-pi/2\", \"pi\", \"0\")")]
    BadAngle(String),
    #[error("cannot parse transmission from {0:?} (use a number in [0,1] or \"num/den\")")]
    BadTransmission(String),
    #[error("transmission {0} outside [0, 1]")]
    TransmissionRange(f64),
}

/// A phase angle, kept exact when it is an integer multiple of π/2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AngleRepr", into = "AngleRepr")]
pub enum Angle {
    /// `k`·π/2 exactly.
    Quarter(i8),
    Radians(f64),
}

impl Angle {
    pub const ZERO: Angle = Angle::Quarter(0);
    pub const PI_2: Angle = Angle::Quarter(1);
    pub const NEG_PI_2: Angle = Angle::Quarter(-1);
    pub const PI: Angle = Angle::Quarter(2);

    pub fn radians(&self) -> f64 {
        match *self {
            Angle::Quarter(k) => k as f64 * FRAC_PI_2,
            Angle::Radians(r) => r,
        }
    }

    /// `k` such that the angle is exactly `k`·π/2, normalized to 0..=3.
    pub fn quarter_turns(&self) -> Option<u8> {
        match *self {
            Angle::Quarter(k) => Some(k.rem_euclid(4) as u8),
            Angle::Radians(_) => None,
        }
    }

    /// e^{iθ}, exact for quarter turns.
    pub fn unit(&self) -> Complex64 {
        match self.quarter_turns() {
            Some(0) => Complex64::new(1.0, 0.0),
            Some(1) => Complex64::new(0.0, 1.0),
            Some(2) => Complex64::new(-1.0, 0.0),
            Some(3) => Complex64::new(0.0, -1.0),
            _ => Complex64::from_polar(1.0, self.radians()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AngleRepr {
    Text(String),
    Num(f64),
}

impl TryFrom<AngleRepr> for Angle {
    type Error = CircuitError;
    fn try_from(repr: AngleRepr) -> Result<Self, Self::Error> {
        match repr {
            AngleRepr::Num(r) => Ok(Angle::Radians(r)),
            AngleRepr::Text(s) => match s.trim() {
                "0" => Ok(Angle::ZERO),
                "pi/2" | "+pi/2" => Ok(Angle::PI_2),
                "-pi/2" => Ok(Angle::NEG_PI_2),
                "pi" | "+pi" => Ok(Angle::PI),
                "-pi" => Ok(Angle::Quarter(-2)),
                other => other
                    .parse::<f64>()
                    .map(Angle::Radians)
                    .map_err(|_| CircuitError::BadAngle(other.to_string())),
            },
        }
    }
}

impl From<Angle> for AngleRepr {
    fn from(a: Angle) -> Self {
        match a {
            Angle::Quarter(k) => AngleRepr::Text(match k.rem_euclid(4) {
                0 => "0".to_string(),
                1 => "pi/2".to_string(),
                2 => "pi".to_string(),
                _ => "-pi/2".to_string(),
            }),
            Angle::Radians(r) => AngleRepr::Num(r),
        }
    }
}

/// Transmission `T` of the D9 beam splitter. The reflection `R = 1 - T` is
/// always derived, never stored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransmissionRepr", into = "TransmissionRepr")]
pub enum Transmission {
    /// Exact rational `num/den` (kept as given; reduced where it matters).
    Ratio {
        num: u64,
        den: u64,
    },
    Value(f64),
}

impl Transmission {
    pub const ONE: Transmission = Transmission::Ratio { num: 1, den: 1 };

    pub fn ratio(num: u64, den: u64) -> Self {
        assert!(den > 0 && num <= den, "transmission must be in [0,1]");
        Transmission::Ratio { num, den }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Transmission::Ratio { num, den } => num as f64 / den as f64,
            Transmission::Value(v) => v,
        }
    }

    pub fn reflection(&self) -> f64 {
        match *self {
            Transmission::Ratio { num, den } => (den - num) as f64 / den as f64,
            Transmission::Value(v) => 1.0 - v,
        }
    }

    pub fn as_ratio(&self) -> Option<(u64, u64)> {
        match *self {
            Transmission::Ratio { num, den } => Some((num, den)),
            Transmission::Value(_) => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TransmissionRepr {
    Text(String),
    Num(f64),
}

impl TryFrom<TransmissionRepr> for Transmission {
    type Error = CircuitError;
    fn try_from(repr: TransmissionRepr) -> Result<Self, Self::Error> {
        let t = match repr {
            TransmissionRepr::Num(v) => {
                if !(0.0..=1.0).contains(&v) {
                    return Err(CircuitError::TransmissionRange(v));
                }
                if v == 0.0 {
                    Transmission::Ratio { num: 0, den: 1 }
                } else if v == 1.0 {
                    Transmission::ONE
                } else {
                    Transmission::Value(v)
                }
            }
            TransmissionRepr::Text(s) => {
                let parts: Vec<&str> = s.trim().split('/').collect();
                match parts.as_slice() {
                    [num, den] => {
                        let num: u64 = num
                            .trim()
                            .parse()
                            .map_err(|_| CircuitError::BadTransmission(s.clone()))?;
                        let den: u64 = den
                            .trim()
                            .parse()
                            .map_err(|_| CircuitError::BadTransmission(s.clone()))?;
                        if den == 0 || num > den {
                            return Err(CircuitError::BadTransmission(s));
                        }
                        Transmission::Ratio { num, den }
                    }
                    [v] => {
                        let v: f64 = v
                            .trim()
                            .parse()
                            .map_err(|_| CircuitError::BadTransmission(s.clone()))?;
                        if !(0.0..=1.0).contains(&v) {
                            return Err(CircuitError::TransmissionRange(v));
                        }
                        Transmission::Value(v)
                    }
                    _ => return Err(CircuitError::BadTransmission(s)),
                }
            }
        };
        Ok(t)
    }
}

impl From<Transmission> for TransmissionRepr {
    fn from(t: Transmission) -> Self {
        match t {
            Transmission::Ratio { num, den } => TransmissionRepr::Text(format!("{num}/{den}")),
            Transmission::Value(v) => TransmissionRepr::Num(v),
        }
    }
}

/// Which arm the metrology probe phase χ acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeArm {
    Arm7,
    Arm8,
}

/// Optional phase-estimation stage: χ on one arm, then a 50-50 splitter
/// recombining arms 7 and 8 into the probe detectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeStage {
    pub arm: ProbeArm,
    pub chi: Angle,
}

/// The detectors of the interferometer plus the two probe-stage outputs.
///
/// A closed enumeration: detector sets are built from these names only, so a
/// detection record can never mix inconsistent labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Detector {
    D1,
    D2,
    D5,
    D5Prime,
    D6,
    D7,
    D8,
    D9,
    P7,
    P8,
}

impl Detector {
    pub const ALL: [Detector; 10] = [
        Detector::D1,
        Detector::D2,
        Detector::D5,
        Detector::D5Prime,
        Detector::D6,
        Detector::D7,
        Detector::D8,
        Detector::D9,
        Detector::P7,
        Detector::P8,
    ];

    pub(crate) fn index(&self) -> usize {
        Detector::ALL.iter().position(|d| d == self).unwrap()
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Detector::D1 => "m1",
            Detector::D2 => "m2",
            Detector::D5 => "m5",
            Detector::D5Prime => "m5p",
            Detector::D6 => "m6",
            Detector::D7 => "m7",
            Detector::D8 => "m8",
            Detector::D9 => "m9",
            Detector::P7 => "k7",
            Detector::P8 => "k8",
        };
        f.write_str(s)
    }
}

/// The complete detector sets: every particle ends in exactly one member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetectorSet {
    /// {1, 2, 5, 6} — the uncorrected circuit.
    Side56,
    /// {1, 2, 5′, 6, 9} — counts just before the final beam splitter.
    Feedforward569,
    /// {1, 2, 7, 8, 9} — the corrected circuit output.
    Output789,
    /// {1, 2, probe-7, probe-8, 9} — with the phase-estimation stage.
    Probe789,
}

impl DetectorSet {
    pub fn detectors(&self) -> &'static [Detector] {
        match self {
            DetectorSet::Side56 => &[Detector::D1, Detector::D2, Detector::D5, Detector::D6],
            DetectorSet::Feedforward569 => &[
                Detector::D1,
                Detector::D2,
                Detector::D5Prime,
                Detector::D6,
                Detector::D9,
            ],
            DetectorSet::Output789 => &[
                Detector::D1,
                Detector::D2,
                Detector::D7,
                Detector::D8,
                Detector::D9,
            ],
            DetectorSet::Probe789 => &[
                Detector::D1,
                Detector::D2,
                Detector::P7,
                Detector::P8,
                Detector::D9,
            ],
        }
    }
}

/// Sources and interferometer parameters: particle numbers, the three phase
/// shifters, the D9 transmission and the optional probe stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub n_alpha: u32,
    pub n_beta: u32,
    pub theta: Angle,
    pub xi: Angle,
    pub zeta: Angle,
    pub transmission: Transmission,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeStage>,
}

impl CircuitConfig {
    /// Total particle number N = N_α + N_β.
    pub fn total(&self) -> u32 {
        self.n_alpha + self.n_beta
    }

    /// The uncorrected circuit: θ = π/2, ξ = 0, full transmission.
    pub fn uncorrected(n_alpha: u32, n_beta: u32) -> Self {
        CircuitConfig {
            n_alpha,
            n_beta,
            theta: Angle::PI_2,
            xi: Angle::ZERO,
            zeta: Angle::PI_2,
            transmission: Transmission::ONE,
            probe: None,
        }
    }

    /// The probing configuration: ζ = 0, T = 1, ξ = 0, so the
    /// NOON formed in arms 5 and 6 re-interferes at the final beam splitter.
    pub fn fringe(n_alpha: u32, n_beta: u32) -> Self {
        CircuitConfig {
            n_alpha,
            n_beta,
            theta: Angle::PI_2,
            xi: Angle::ZERO,
            zeta: Angle::ZERO,
            transmission: Transmission::ONE,
            probe: None,
        }
    }

    pub fn with_probe(mut self, arm: ProbeArm, chi: Angle) -> Self {
        self.probe = Some(ProbeStage { arm, chi });
        self
    }
}

/// Corrected-circuit configuration for observed side counts (m₁, m₂):
/// θ = π/2, ζ = π/2, ξ = -π/2 for m₁ ≥ m₂ (else +π/2 with the roles of m₁
/// and m₂ interchanged), and T the feedforward ratio of the smaller to the
/// larger count. Equal counts need no correction, so T = 1 there.
pub fn standard_config(n_alpha: u32, n_beta: u32, m1: u32, m2: u32) -> CircuitConfig {
    let (lo, hi) = (m1.min(m2), m1.max(m2));
    let transmission = if hi == 0 || lo == hi {
        Transmission::ONE
    } else {
        Transmission::ratio(lo as u64, hi as u64)
    };
    CircuitConfig {
        n_alpha,
        n_beta,
        theta: Angle::PI_2,
        xi: if m1 >= m2 {
            Angle::NEG_PI_2
        } else {
            Angle::PI_2
        },
        zeta: Angle::PI_2,
        transmission,
        probe: None,
    }
}

/// The coefficient pairs `(c_α(d), c_β(d))` for every detector, plus the
/// derived final-splitter factors `u = √T e^{iζ} - 1`, `v = -i(√T e^{iζ} + 1)`.
#[derive(Clone, Debug)]
pub struct ModeCoefficients {
    rows: [(Complex64, Complex64); 10],
    pub u: Complex64,
    pub v: Complex64,
}

impl ModeCoefficients {
    pub fn row(&self, d: Detector) -> (Complex64, Complex64) {
        self.rows[d.index()]
    }
}

/// Trace every detector operator back to the sources.
///
/// When a probe stage is configured, the designated arm's pair is multiplied
/// by e^{iχ} and arms 7, 8 are recombined on a 50-50 splitter into the
/// probe rows; the plain 7, 8 rows stay available.
pub fn detector_coefficients(config: &CircuitConfig) -> ModeCoefficients {
    let i = Complex64::new(0.0, 1.0);
    let e_theta = config.theta.unit();
    let e_xi = config.xi.unit();
    let e_zeta = config.zeta.unit();
    let st = config.transmission.value().sqrt();
    let sr = config.transmission.reflection().sqrt();
    let u = st * e_zeta - 1.0;
    let v = -i * (st * e_zeta + 1.0);
    let w = 0.5 / 2.0_f64.sqrt(); // 1/(2√2)

    let mut rows = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];
    rows[Detector::D1.index()] = (0.5 * i * e_theta, Complex64::new(-0.5, 0.0));
    rows[Detector::D2.index()] = (-0.5 * e_theta, 0.5 * i);
    rows[Detector::D5.index()] = (0.5 * i * (i * e_xi), 0.5 * i);
    rows[Detector::D5Prime.index()] = (-0.5 * st * e_zeta * (i * e_xi), -0.5 * st * e_zeta);
    rows[Detector::D6.index()] = (0.5 * i * e_xi, Complex64::new(-0.5, 0.0));
    rows[Detector::D7.index()] = (w * u * e_xi, w * v);
    rows[Detector::D8.index()] = (w * v * e_xi, -w * u);
    rows[Detector::D9.index()] = (-0.5 * i * sr * (i * e_xi), -0.5 * i * sr);

    if let Some(probe) = config.probe {
        let e_chi = probe.chi.unit();
        let (c7a, c7b) = rows[Detector::D7.index()];
        let (c8a, c8b) = rows[Detector::D8.index()];
        let ((c7a, c7b), (c8a, c8b)) = match probe.arm {
            ProbeArm::Arm7 => ((e_chi * c7a, e_chi * c7b), (c8a, c8b)),
            ProbeArm::Arm8 => ((c7a, c7b), (e_chi * c8a, e_chi * c8b)),
        };
        let s = 1.0 / 2.0_f64.sqrt();
        rows[Detector::P7.index()] = (s * (c7a + i * c8a), s * (c7b + i * c8b));
        rows[Detector::P8.index()] = (s * (i * c7a + c8a), s * (i * c7b + c8b));
    }

    ModeCoefficients { rows, u, v }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn detector_one_at_theta_pi_2() {
        let cfg = CircuitConfig::uncorrected(2, 2);
        let coeffs = detector_coefficients(&cfg);
        let (ca, cb) = coeffs.row(Detector::D1);
        // ie^{iπ/2} = -1, so detector 1 reads -(a_α + a_β)/2.
        assert!(close(ca, Complex64::new(-0.5, 0.0)));
        assert!(close(cb, Complex64::new(-0.5, 0.0)));
    }

    #[test]
    fn detector_nine_at_xi_minus_pi_2() {
        let mut cfg = standard_config(35, 35, 22, 8);
        cfg.transmission = Transmission::Value(0.36);
        cfg.zeta = Angle::Radians(0.77);
        let coeffs = detector_coefficients(&cfg);
        let (ca, cb) = coeffs.row(Detector::D9);
        let expect = Complex64::new(0.0, -0.5 * 0.64_f64.sqrt());
        assert!(close(ca, expect), "{ca}");
        assert!(close(cb, expect));
    }

    #[test]
    fn u_v_factors_at_zeta_pi_2() {
        let mut cfg = standard_config(1, 1, 1, 1);
        cfg.transmission = Transmission::Value(0.36);
        let coeffs = detector_coefficients(&cfg);
        assert!(close(coeffs.u, Complex64::new(-1.0, 0.6)));
        assert!(close(coeffs.v, Complex64::new(0.6, -1.0)));
    }

    #[test]
    fn standard_config_branches() {
        let cfg = standard_config(35, 35, 22, 8);
        assert_eq!(cfg.xi, Angle::NEG_PI_2);
        assert_eq!(cfg.theta, Angle::PI_2);
        assert_eq!(cfg.zeta, Angle::PI_2);
        assert_eq!(cfg.transmission.as_ratio(), Some((8, 22)));

        // Swapping m1 and m2 flips only the sign of ξ.
        let swapped = standard_config(35, 35, 8, 22);
        assert_eq!(swapped.xi, Angle::PI_2);
        assert_eq!(swapped.transmission.as_ratio(), Some((8, 22)));

        assert_eq!(
            standard_config(30, 30, 15, 15).transmission,
            Transmission::ONE
        );
    }

    #[test]
    fn no_amplitude_reaches_d9_at_full_transmission() {
        let cfg = standard_config(30, 30, 15, 15);
        let coeffs = detector_coefficients(&cfg);
        let (ca, cb) = coeffs.row(Detector::D9);
        assert_eq!(ca, Complex64::new(0.0, 0.0));
        assert_eq!(cb, Complex64::new(0.0, 0.0));
    }

    fn isometry_check(cfg: &CircuitConfig, set: DetectorSet) {
        let coeffs = detector_coefficients(cfg);
        let mut aa = Complex64::new(0.0, 0.0);
        let mut bb = Complex64::new(0.0, 0.0);
        let mut ab = Complex64::new(0.0, 0.0);
        for &d in set.detectors() {
            let (ca, cb) = coeffs.row(d);
            aa += ca.conj() * ca;
            bb += cb.conj() * cb;
            ab += ca.conj() * cb;
        }
        assert!(close(aa, Complex64::new(1.0, 0.0)), "{set:?}: {aa}");
        assert!(close(bb, Complex64::new(1.0, 0.0)), "{set:?}: {bb}");
        assert!(close(ab, Complex64::new(0.0, 0.0)), "{set:?}: {ab}");
    }

    #[test]
    fn complete_sets_are_isometries() {
        let mut cfg = CircuitConfig {
            n_alpha: 3,
            n_beta: 4,
            theta: Angle::Radians(0.3),
            xi: Angle::Radians(-1.1),
            zeta: Angle::Radians(2.2),
            transmission: Transmission::Value(0.41),
            probe: None,
        };
        isometry_check(&cfg, DetectorSet::Side56);
        isometry_check(&cfg, DetectorSet::Feedforward569);
        isometry_check(&cfg, DetectorSet::Output789);
        cfg.probe = Some(ProbeStage {
            arm: ProbeArm::Arm7,
            chi: Angle::Radians(0.9),
        });
        isometry_check(&cfg, DetectorSet::Probe789);
        cfg.probe = Some(ProbeStage {
            arm: ProbeArm::Arm8,
            chi: Angle::Radians(-0.4),
        });
        isometry_check(&cfg, DetectorSet::Probe789);
    }

    #[test]
    fn config_json_round_trip_with_exact_angle_strings() {
        let cfg = standard_config(35, 35, 22, 8);
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"-pi/2\""), "{json}");
        assert!(json.contains("\"8/22\""), "{json}");
        let back: CircuitConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);

        let parsed: CircuitConfig = serde_json::from_str(
            r#"{"n_alpha":30,"n_beta":30,"theta":"pi/2","xi":"0","zeta":"pi/2","transmission":1.0}"#,
        )
        .unwrap();
        assert_eq!(parsed.xi.quarter_turns(), Some(0));
        assert_eq!(parsed.transmission, Transmission::ONE);

        let radians: CircuitConfig = serde_json::from_str(
            r#"{"n_alpha":1,"n_beta":1,"theta":0.77,"xi":"pi","zeta":"-pi/2","transmission":0.25}"#,
        )
        .unwrap();
        assert_eq!(radians.theta, Angle::Radians(0.77));
        assert_eq!(radians.xi.quarter_turns(), Some(2));
        assert_eq!(radians.zeta.quarter_turns(), Some(3));
        assert_eq!(radians.transmission, Transmission::Value(0.25));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(serde_json::from_str::<CircuitConfig>(
            r#"{"n_alpha":1,"n_beta":1,"theta":"pi/3x","xi":0,"zeta":0,"transmission":1}"#
        )
        .is_err());
        assert!(serde_json::from_str::<CircuitConfig>(
            r#"{"n_alpha":1,"n_beta":1,"theta":0,"xi":0,"zeta":0,"transmission":1.5}"#
        )
        .is_err());
        assert!(serde_json::from_str::<CircuitConfig>(
            r#"{"n_alpha":1,"n_beta":1,"theta":0,"xi":0,"zeta":0,"transmission":"5/4"}"#
        )
        .is_err());
    }

    #[test]
    fn quarter_turn_units_are_exact() {
        assert_eq!(Angle::PI_2.unit(), Complex64::new(0.0, 1.0));
        assert_eq!(Angle::NEG_PI_2.unit(), Complex64::new(0.0, -1.0));
        assert_eq!(Angle::PI.unit(), Complex64::new(-1.0, 0.0));
        assert_eq!(Angle::ZERO.unit(), Complex64::new(1.0, 0.0));
        assert_eq!(Angle::Quarter(5).unit(), Complex64::new(0.0, 1.0));
    }
}
