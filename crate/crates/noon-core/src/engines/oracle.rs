//! Brute-force statevector oracle.
//!
//! Expands |N_α N_β⟩ in the full multi-mode Fock basis and pushes it through
//! the circuit one elementary element at a time: the two source draw-off
//! splitters, the θ shifter, the D1/D2 splitter, the ξ shifter, the middle
//! splitter, the D9 splitter (with ζ), the final splitter, and optionally
//! the probe stage. The composition of these unitaries reproduces the
//! traced-back detector operators, which the tests verify against both
//! amplitude engines. Cost is exponential, hence the particle-number guard.

use num_complex::Complex64;
use std::collections::HashMap;

use crate::circuit::{CircuitConfig, Detector, DetectorSet, ProbeArm};

use super::EngineError;

/// Largest total particle number the oracle accepts.
pub const ORACLE_MAX_TOTAL: u32 = 12;

type State = HashMap<Vec<u32>, Complex64>;

fn fact(n: u32) -> f64 {
    (1..=n as u64).map(|k| k as f64).product::<f64>().max(1.0)
}

/// Apply a two-mode splitter with Heisenberg matrix `b = V a` on modes
/// (i, j): creation operators transform as a† = Vᵀ b†.
fn apply_two_mode(state: &State, i: usize, j: usize, v: [[Complex64; 2]; 2]) -> State {
    let mut out: State = HashMap::with_capacity(state.len() * 2);
    for (occ, &amp) in state {
        let ni = occ[i];
        let nj = occ[j];
        // (a†_i)^{ni}(a†_j)^{nj} = (v11 b†_i + v21 b†_j)^{ni}(v12 b†_i + v22 b†_j)^{nj}
        for r in 0..=ni {
            for t in 0..=nj {
                let ki = r + t;
                let kj = ni + nj - ki;
                let coeff = binom_f(ni, r)
                    * binom_f(nj, t)
                    * v[0][0].powu(r)
                    * v[1][0].powu(ni - r)
                    * v[0][1].powu(t)
                    * v[1][1].powu(nj - t);
                if coeff.norm_sqr() == 0.0 {
                    continue;
                }
                let norm = (fact(ki) * fact(kj) / (fact(ni) * fact(nj))).sqrt();
                let mut key = occ.clone();
                key[i] = ki;
                key[j] = kj;
                *out.entry(key).or_insert(Complex64::new(0.0, 0.0)) += amp * coeff * norm;
            }
        }
    }
    out
}

fn binom_f(n: u32, k: u32) -> f64 {
    fact(n) / (fact(k) * fact(n - k))
}

fn apply_phase(state: &State, i: usize, unit: Complex64) -> State {
    state
        .iter()
        .map(|(occ, &amp)| (occ.clone(), amp * unit.powu(occ[i])))
        .collect()
}

/// Mode slots: 0 = α path, 1 = β path, 2 = α side arm, 3 = β side arm,
/// 4 = D9 arm.
fn run_circuit(config: &CircuitConfig, set: DetectorSet) -> State {
    let i = Complex64::new(0.0, 1.0);
    let s = 1.0 / 2.0_f64.sqrt();
    let h = [
        [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
    ];

    let mut state: State = HashMap::new();
    state.insert(
        vec![config.n_alpha, config.n_beta, 0, 0, 0],
        Complex64::new(1.0, 0.0),
    );

    // Draw-off splitters toward the side detectors.
    state = apply_two_mode(&state, 0, 2, h);
    state = apply_two_mode(&state, 1, 3, h);
    // θ on the α side arm, then the D1/D2 splitter.
    state = apply_phase(&state, 2, config.theta.unit());
    let bs_side = [
        [i * s, Complex64::new(-s, 0.0)],
        [Complex64::new(-s, 0.0), i * s],
    ];
    state = apply_two_mode(&state, 2, 3, bs_side);
    // ξ on the α path, then the middle splitter into arms 5 and 6.
    state = apply_phase(&state, 0, config.xi.unit());
    let bs_mid = [
        [Complex64::new(-s, 0.0), i * s],
        [i * s, Complex64::new(-s, 0.0)],
    ];
    state = apply_two_mode(&state, 0, 1, bs_mid);
    if set == DetectorSet::Side56 {
        return state;
    }

    // D9 splitter with phase ζ: arm 5 → (5′, 9).
    let st = config.transmission.value().sqrt();
    let sr = config.transmission.reflection().sqrt();
    let e_zeta = config.zeta.unit();
    let bs_d9 = [
        [i * st * e_zeta, i * sr * e_zeta],
        [Complex64::new(-sr, 0.0), Complex64::new(st, 0.0)],
    ];
    state = apply_two_mode(&state, 0, 4, bs_d9);
    if set == DetectorSet::Feedforward569 {
        return state;
    }

    // Final splitter: (5′, 6) → (7, 8).
    let bs_final = [
        [i * s, i * s],
        [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
    ];
    state = apply_two_mode(&state, 0, 1, bs_final);
    if set == DetectorSet::Output789 {
        return state;
    }

    // Probe stage: χ on one arm, then a 50-50 recombiner.
    let probe = config
        .probe
        .expect("probe stage required for the probe set");
    match probe.arm {
        ProbeArm::Arm7 => state = apply_phase(&state, 0, probe.chi.unit()),
        ProbeArm::Arm8 => state = apply_phase(&state, 1, probe.chi.unit()),
    }
    let bs_probe = [
        [Complex64::new(s, 0.0), i * s],
        [i * s, Complex64::new(s, 0.0)],
    ];
    apply_two_mode(&state, 0, 1, bs_probe)
}

fn slot(set: DetectorSet, d: Detector) -> usize {
    match d {
        Detector::D1 => 2,
        Detector::D2 => 3,
        Detector::D5 | Detector::D5Prime | Detector::D7 | Detector::P7 => 0,
        Detector::D6 | Detector::D8 | Detector::P8 => 1,
        Detector::D9 => {
            debug_assert!(set != DetectorSet::Side56);
            4
        }
    }
}

/// Joint number-basis probabilities for a complete detector set, keyed by
/// counts in `set.detectors()` order.
pub fn oracle_joint(
    config: &CircuitConfig,
    set: DetectorSet,
) -> Result<HashMap<Vec<u32>, f64>, EngineError> {
    let n = config.total();
    if n > ORACLE_MAX_TOTAL {
        return Err(EngineError::CostGuard {
            total: n,
            max: ORACLE_MAX_TOTAL,
        });
    }
    if set == DetectorSet::Probe789 && config.probe.is_none() {
        return Err(EngineError::MissingProbe);
    }
    let state = run_circuit(config, set);
    let detectors = set.detectors();
    let mut out = HashMap::with_capacity(state.len());
    for (occ, amp) in state {
        let key: Vec<u32> = detectors.iter().map(|&d| occ[slot(set, d)]).collect();
        let p = amp.norm_sqr();
        // Unused slots must be empty once the set's stages have run.
        debug_assert!({
            let used: u32 = key.iter().sum();
            used == occ.iter().sum::<u32>()
        });
        *out.entry(key).or_insert(0.0) += p;
    }
    Ok(out)
}

/// Probability of a single detection outcome, via full state evolution.
pub fn oracle_probability(
    config: &CircuitConfig,
    set: DetectorSet,
    counts: &[u32],
) -> Result<f64, EngineError> {
    let joint = oracle_joint(config, set)?;
    Ok(joint.get(counts).copied().unwrap_or(0.0))
}
