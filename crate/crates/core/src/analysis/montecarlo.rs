use rayon::prelude::*;

use super::AnalysisError;
use crate::protocol::{run_session, session_rng, ProtocolParams, SessionStats};
use crate::strategy::{AliceStrategy, BobStrategy};

/// Sample mean of Alice's per-round gain with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
}

impl MonteCarloEstimate {
    /// Distance from `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.std_error
    }
}

pub fn monte_carlo_gain(stats: &SessionStats) -> Result<MonteCarloEstimate, AnalysisError> {
    let n = stats.rounds;
    if n < 2 {
        return Err(AnalysisError::TooFewRounds(n));
    }
    let nf = n as f64;
    let mean = stats.alice_gain_total / nf;
    let var = ((stats.alice_gain_sq_total - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var / nf).sqrt(),
        n,
    })
}

/// Splits `total_rounds` across `sessions` independent streams of
/// `master_seed`, runs them in parallel and merges the ledgers in session
/// order. The result does not depend on the thread count.
pub fn simulate_sessions<A, B>(
    alice: &A,
    bob: &B,
    params: &ProtocolParams,
    total_rounds: u64,
    sessions: u64,
    master_seed: u64,
) -> Result<SessionStats, AnalysisError>
where
    A: AliceStrategy + ?Sized,
    B: BobStrategy + ?Sized,
{
    let sessions = sessions.clamp(1, total_rounds.max(1));
    let base = total_rounds / sessions;
    let extra = total_rounds % sessions;
    let parts: Vec<SessionStats> = (0..sessions)
        .into_par_iter()
        .map(|i| {
            let n = base + u64::from(i < extra);
            let mut rng = session_rng(master_seed, i);
            run_session(alice, bob, params, n, &mut rng)
        })
        .collect::<Result<_, _>>()?;
    Ok(parts
        .iter()
        .fold(SessionStats::default(), |acc, s| acc.merge(s)))
}
