//! Expected-gain analysis.
//!
//! Three independent routes to Alice's per-round gain live here: closed-form
//! expressions ([`formulas`]), exact enumeration of every round branch with
//! Born probabilities ([`oracle`]), and sampling through the real engine
//! ([`montecarlo`]). The closed forms are cross-checked against the oracle
//! and the oracle against sampling.

pub mod formulas;
pub mod montecarlo;
pub mod optimize;
pub mod oracle;
pub mod sweep;

use thiserror::Error;

use crate::protocol::{ParamError, ProtocolError};
use crate::strategy::StrategyError;

pub use formulas::{
    claim_gain_bound, constants, exact_cheat_gain, exact_cheat_gain_for_state,
    linearized_gain_bound, linearized_optimum, optimal_check_rate, unmeasured_posterior,
    unmeasured_posterior_for_state, CheckRateOptimum, Constants, Optimum,
};
pub use montecarlo::{monte_carlo_gain, simulate_sessions, MonteCarloEstimate};
pub use optimize::golden_section_maximize;
pub use oracle::{
    oracle_expected_gain, oracle_expected_gain_with, oracle_transcript, TranscriptDistribution,
    TranscriptKey,
};
pub use sweep::{sweep_cheat_gain, SweepRow, SweepTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("strategy `{0}` is not enumerable: {1}")]
    NotEnumerable(String, String),
    #[error("need at least 2 rounds for a standard error, got {0}")]
    TooFewRounds(u64),
    #[error("{0} grid is empty")]
    EmptyGrid(&'static str),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// Alice's expected per-round gain split by where it comes from.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GainBreakdown {
    /// Normal rounds, weighted by `1 − r`.
    pub normal_term: f64,
    /// Caught cheating in checking rounds; never positive.
    pub detect_term: f64,
    /// Checking rounds that passed verification.
    pub pass_term: f64,
    pub total: f64,
}

impl GainBreakdown {
    pub fn new(normal_term: f64, detect_term: f64, pass_term: f64) -> Self {
        GainBreakdown {
            normal_term,
            detect_term,
            pass_term,
            total: normal_term + detect_term + pass_term,
        }
    }

    /// Largest difference across the four fields.
    pub fn max_abs_diff(&self, other: &GainBreakdown) -> f64 {
        [
            self.normal_term - other.normal_term,
            self.detect_term - other.detect_term,
            self.pass_term - other.pass_term,
            self.total - other.total,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }
}
