use rayon::prelude::*;

use super::{oracle_expected_gain, AnalysisError, GainBreakdown};
use crate::protocol::{ProtocolParams, StateLabel};
use crate::strategy::{fixed_state_cheat, CheatPoint, ClaimPolicy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub point: CheatPoint,
    /// The label the point's policy resolved to.
    pub claim: StateLabel,
    pub gain: GainBreakdown,
}

/// Oracle gains over a grid, ordered theta-major, then phi, then policy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Index of the first row with the largest total gain.
    pub argmax: Option<usize>,
}

impl SweepTable {
    pub fn max_row(&self) -> Option<&SweepRow> {
        self.argmax.map(|i| &self.rows[i])
    }

    /// For every `(theta, policy)` pair, the phis whose gain is within `tol`
    /// of the best phi for that pair. Ties are expected at the poles.
    pub fn maximizing_phis(&self, tol: f64) -> Vec<(f64, ClaimPolicy, Vec<f64>)> {
        let mut groups: Vec<(f64, ClaimPolicy, Vec<&SweepRow>)> = Vec::new();
        for row in &self.rows {
            let key = (row.point.theta(), row.point.claim_policy());
            match groups.iter_mut().find(|g| (g.0, g.1) == key) {
                Some(g) => g.2.push(row),
                None => groups.push((key.0, key.1, vec![row])),
            }
        }
        groups
            .into_iter()
            .map(|(theta, policy, rows)| {
                let best = rows
                    .iter()
                    .map(|r| r.gain.total)
                    .fold(f64::NEG_INFINITY, f64::max);
                let phis = rows
                    .iter()
                    .filter(|r| r.gain.total >= best - tol)
                    .map(|r| r.point.phi())
                    .collect();
                (theta, policy, phis)
            })
            .collect()
    }
}

/// Exact gain of every fixed-state cheat on the grid against honest Bob.
pub fn sweep_cheat_gain(
    params: &ProtocolParams,
    thetas: &[f64],
    phis: &[f64],
    policies: &[ClaimPolicy],
) -> Result<SweepTable, AnalysisError> {
    params.validate()?;
    if thetas.is_empty() {
        return Err(AnalysisError::EmptyGrid("theta"));
    }
    if phis.is_empty() {
        return Err(AnalysisError::EmptyGrid("phi"));
    }
    if policies.is_empty() {
        return Err(AnalysisError::EmptyGrid("claim policy"));
    }
    let mut points = Vec::with_capacity(thetas.len() * phis.len() * policies.len());
    for &theta in thetas {
        for &phi in phis {
            for &policy in policies {
                points.push(CheatPoint::new(theta, phi, policy)?);
            }
        }
    }
    let rows: Vec<SweepRow> = points
        .into_par_iter()
        .map(|point| {
            let gain = oracle_expected_gain(&fixed_state_cheat(point), params)?;
            Ok(SweepRow {
                point,
                claim: point.claim(),
                gain,
            })
        })
        .collect::<Result<_, AnalysisError>>()?;
    let argmax = rows
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, r)| match best {
            Some((_, g)) if g >= r.gain.total => best,
            _ => Some((i, r.gain.total)),
        })
        .map(|(i, _)| i);
    Ok(SweepTable { rows, argmax })
}
