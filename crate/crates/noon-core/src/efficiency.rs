//! Circuit efficiency analysis: what fraction of side-count records yields
//! a good NOON, with and without the feedforward correction.
//!
//! All sweeps assume equal sources N_α = N_β = N/2, run grid-parallel over
//! the (m₁, m₂) cells and reduce in sorted cell order, so results are
//! bit-stable across thread counts.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{CircuitConfig, Detector, DetectorSet};
use crate::engines::{conditional_distribution, EngineError, EngineKind};
use crate::feedforward::{expected_m9_exact, plan, FeedforwardError};
use crate::numerics::rational_to_f64;
use crate::quality::{self, QualityError, QualityReport};

#[derive(Debug, Error)]
pub enum EfficiencyError {
    #[error("equal sources required: total particle number {0} is odd")]
    OddTotal(u32),
    #[error("output count {output} must lie strictly between 0 and N = {n}")]
    BadOutputCount { output: u32, n: u32 },
    #[error("sweep is empty: no admissible (m1, m2) cells")]
    EmptySweep,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Quality(#[from] QualityError),
    #[error(transparent)]
    Feedforward(#[from] FeedforwardError),
}

/// One (m₁[, m₂]) cell of a sweep: its quality factors and the absolute
/// probability of the full detection record.
#[derive(Clone, Debug, Serialize)]
pub struct SweepCell {
    pub m1: u32,
    pub m2: u32,
    pub q1: f64,
    pub q2: f64,
    /// Joint probability of the cell's conditioning record (all prefactors,
    /// summed over the free output variable).
    pub absolute: f64,
}

/// A probability-weighted average over sweep cells.
#[derive(Clone, Debug, Serialize)]
pub struct AveragedOutput {
    /// Normalized averaged distribution over the output count.
    pub probabilities: Vec<f64>,
    pub quality: QualityReport,
    /// Total absolute probability of all contributing records.
    pub total_probability: f64,
    pub cells: Vec<SweepCell>,
}

/// Per-m₁ qualities of the uncorrected circuit at fixed N and m₅₆
/// (m₂ = N − m₅₆ − m₁), selecting on the side counts only.
pub fn uncorrected_sweep(
    n: u32,
    m56: u32,
    kind: EngineKind,
) -> Result<Vec<SweepCell>, EfficiencyError> {
    Ok(uncorrected_rows(n, m56, kind)?
        .into_iter()
        .map(|(cell, _)| cell)
        .collect())
}

fn uncorrected_rows(
    n: u32,
    m56: u32,
    kind: EngineKind,
) -> Result<Vec<(SweepCell, Vec<f64>)>, EfficiencyError> {
    if !n.is_multiple_of(2) {
        return Err(EfficiencyError::OddTotal(n));
    }
    if m56 == 0 || m56 >= n {
        return Err(EfficiencyError::BadOutputCount { output: m56, n });
    }
    let config = CircuitConfig::uncorrected(n / 2, n / 2);
    (0..=(n - m56))
        .into_par_iter()
        .map(|m1| {
            let m2 = n - m56 - m1;
            let dist = conditional_distribution(
                &config,
                DetectorSet::Side56,
                &[(Detector::D1, m1), (Detector::D2, m2)],
                Detector::D5,
                kind,
            )?;
            let report = quality::report(&dist)?;
            let cell = SweepCell {
                m1,
                m2,
                q1: report.q1,
                q2: report.q2,
                absolute: dist.total_absolute,
            };
            Ok((cell, dist.absolute))
        })
        .collect()
}

/// Average the uncorrected circuit over every m₁ at fixed m₅₆: the NOON one
/// would get by accepting all events with that output size.
pub fn averaged_uncorrected(
    n: u32,
    m56: u32,
    kind: EngineKind,
) -> Result<AveragedOutput, EfficiencyError> {
    average(uncorrected_rows(n, m56, kind)?)
}

fn average(rows: Vec<(SweepCell, Vec<f64>)>) -> Result<AveragedOutput, EfficiencyError> {
    if rows.is_empty() {
        return Err(EfficiencyError::EmptySweep);
    }
    let len = rows[0].1.len();
    let mut accumulated = vec![0.0; len];
    let mut total = 0.0;
    for (cell, absolute) in &rows {
        debug_assert_eq!(absolute.len(), len);
        for (acc, a) in accumulated.iter_mut().zip(absolute) {
            *acc += a;
        }
        total += cell.absolute;
    }
    let probabilities: Vec<f64> = accumulated.iter().map(|a| a / total).collect();
    let quality = quality::report_from_probabilities(&probabilities)?;
    Ok(AveragedOutput {
        probabilities,
        quality,
        total_probability: total,
        cells: rows.into_iter().map(|(c, _)| c).collect(),
    })
}

/// Probability (percent) of getting an uncorrected NOON with q₁ at least
/// `q1_threshold` and output count m₅₆ ≥ `n_min`.
pub fn selective_acceptance(
    n: u32,
    q1_threshold: f64,
    n_min: u32,
    kind: EngineKind,
) -> Result<f64, EfficiencyError> {
    let mut total = 0.0;
    for m56 in n_min.max(1)..n {
        for cell in uncorrected_sweep(n, m56, kind)? {
            if cell.q1 >= q1_threshold {
                total += cell.absolute;
            }
        }
    }
    Ok(100.0 * total)
}

/// The minimum-output acceptance table: percentages over minimum output
/// numbers × thresholds, computing each (m₁, m₂) cell once.
pub fn table_minn(
    n: u32,
    n_mins: &[u32],
    thresholds: &[f64],
    kind: EngineKind,
) -> Result<Vec<Vec<f64>>, EfficiencyError> {
    let min_nmin = n_mins.iter().copied().min().unwrap_or(1).max(1);
    let mut cells: Vec<(u32, SweepCell)> = Vec::new();
    for m56 in min_nmin..n {
        for cell in uncorrected_sweep(n, m56, kind)? {
            cells.push((m56, cell));
        }
    }
    Ok(n_mins
        .iter()
        .map(|&n_min| {
            thresholds
                .iter()
                .map(|&thr| {
                    let mass: f64 = cells
                        .iter()
                        .filter(|(m56, c)| *m56 >= n_min && c.q1 >= thr)
                        .map(|(_, c)| c.absolute)
                        .sum();
                    // An empty sum is -0.0; keep percentages signless.
                    100.0 * mass.max(0.0)
                })
                .collect()
        })
        .collect())
}

/// Average the corrected circuit over every (m₁, m₂) at fixed output count
/// m₇₈, with m₉ = N − m₇₈ − m₁ − m₂ determined per cell and the
/// transmission set by the per-cell feedforward plan. The (0,0) cell
/// carries no phase information and is skipped.
pub fn averaged_corrected(
    n: u32,
    m78: u32,
    kind: EngineKind,
) -> Result<AveragedOutput, EfficiencyError> {
    if !n.is_multiple_of(2) {
        return Err(EfficiencyError::OddTotal(n));
    }
    if m78 == 0 || m78 >= n {
        return Err(EfficiencyError::BadOutputCount { output: m78, n });
    }
    let rest = n - m78;
    let mut grid: Vec<(u32, u32)> = Vec::new();
    for m1 in 0..=rest {
        for m2 in 0..=(rest - m1) {
            if m1 + m2 > 0 {
                grid.push((m1, m2));
            }
        }
    }
    let rows: Result<Vec<(SweepCell, Vec<f64>)>, EfficiencyError> = grid
        .into_par_iter()
        .map(|(m1, m2)| {
            let m9 = rest - m1 - m2;
            let ff = plan(n, m1, m2)?;
            let config = ff.config(n / 2, n / 2);
            let dist = conditional_distribution(
                &config,
                DetectorSet::Output789,
                &[(Detector::D1, m1), (Detector::D2, m2), (Detector::D9, m9)],
                Detector::D7,
                kind,
            )?;
            let report = quality::report(&dist)?;
            let cell = SweepCell {
                m1,
                m2,
                q1: report.q1,
                q2: report.q2,
                absolute: dist.total_absolute,
            };
            Ok((cell, dist.absolute))
        })
        .collect();
    average(rows?)
}

/// Grid cells where the actual m₉ = N − m₇₈ − m₁ − m₂ equals the most
/// likely value predicted by the feedforward mean formula.
pub fn m9_match_locus(n: u32, m78: u32) -> Vec<(u32, u32)> {
    let rest = n.saturating_sub(m78);
    let mut locus = Vec::new();
    for m1 in 0..=rest {
        for m2 in 0..=(rest - m1) {
            if m1 + m2 == 0 {
                continue;
            }
            let expected = rational_to_f64(&expected_m9_exact(n, m1, m2));
            if expected.round() as i64 == (rest - m1 - m2) as i64 {
                locus.push((m1, m2));
            }
        }
    }
    locus
}
