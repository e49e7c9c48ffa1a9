//! Simulation of NOON-state formation from two Fock-state sources in a
//! feedforward-corrected Mach-Zehnder interferometer.
//!
//! Side detections D1/D2 project the uncounted particles onto a
//! superposition of two phase states; a beam splitter of transmission `T`,
//! set from the observed counts, rotates the branches into orthogonality so
//! that an approximate NOON state emerges in the output arms. This crate
//! computes the exact joint detection statistics of that circuit by three
//! independent methods, the feedforward transmission rule, NOON quality
//! factors, circuit efficiency sweeps, and phase-estimation figures of
//! merit.
//!
//! Module map:
//!
//! * [`numerics`] — big-integer/rational kernels, log-magnitude floats,
//!   periodic quadrature.
//! * [`circuit`] — interferometer parameters and the detector coefficient
//!   table.
//! * [`engines`] — joint detection amplitudes via exact multinomial sums,
//!   the integral representation, and a brute-force statevector oracle.
//! * [`phase`] — phase-state profiles, peak locations, the cubic peak
//!   equation and the exact transmission condition.
//! * [`feedforward`] — the correction rule `T = m2/m1` and the exact m9
//!   statistics behind it.
//! * [`quality`] — NOON quality factors q1 and q2.
//! * [`efficiency`] — corrected/uncorrected acceptance sweeps and averaged
//!   output states.
//! * [`metrology`] — Fisher information, path symmetry, interference
//!   fringes and Bayesian phase estimation.
//! * [`selftest`] — the acceptance checks, runnable from tests or the CLI.

pub mod circuit;
pub mod efficiency;
pub mod engines;
pub mod feedforward;
pub mod metrology;
pub mod numerics;
pub mod phase;
pub mod quality;
pub mod selftest;
