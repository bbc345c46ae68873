//! Exact expectation by enumerating every branch of a round.
//!
//! The branches are: Alice's preparation × channel Pauli × normal/check ×
//! Bob's outcome or blind guess × Alice's own outcome × verification
//! outcome. Lone qubits are embedded as `|0⟩_A ⊗ |s⟩_B` so every branch
//! probability is a joint Born probability on a two-qubit state; nothing is
//! sampled and no state is collapsed along the way.

use std::collections::BTreeMap;

use super::{AnalysisError, GainBreakdown};
use crate::protocol::{
    noise_branches, settle, CheckResult, ProtocolError, ProtocolParams, Register, RoundType,
    StateLabel,
};
use crate::qubit::{Outcome, Subsystem, TwoQubitPure};
use crate::strategy::{honest_bob, AliceStrategy, BobStrategy, ClaimRule, MeasurementChoice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TranscriptKey {
    pub round_type: RoundType,
    pub bob_guess: StateLabel,
    pub alice_claim: StateLabel,
    pub check_result: CheckResult,
}

/// Exact probability of every distinguishable round transcript.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TranscriptDistribution {
    probs: BTreeMap<TranscriptKey, f64>,
}

impl TranscriptDistribution {
    fn add(&mut self, key: TranscriptKey, prob: f64) {
        *self.probs.entry(key).or_insert(0.0) += prob;
    }

    pub fn probability(&self, key: &TranscriptKey) -> f64 {
        self.probs.get(key).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TranscriptKey, &f64)> {
        self.probs.iter()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Largest probability difference over the union of both supports.
    pub fn max_abs_diff(&self, other: &TranscriptDistribution) -> f64 {
        self.probs
            .keys()
            .chain(other.probs.keys())
            .map(|k| (self.probability(k) - other.probability(k)).abs())
            .fold(0.0, f64::max)
    }

    /// Probability that a checking round ends in a failed verification.
    pub fn check_fail_probability(&self) -> f64 {
        self.probs
            .iter()
            .filter(|(k, _)| k.check_result == CheckResult::Fail)
            .map(|(_, p)| p)
            .sum()
    }

    /// Expected per-round transfer to Alice, split by round outcome.
    pub fn gain(&self, params: &ProtocolParams) -> GainBreakdown {
        let (mut normal, mut detect, mut pass) = (0.0, 0.0, 0.0);
        for (k, p) in &self.probs {
            let t = p * settle(params, k.bob_guess, k.alice_claim, k.check_result);
            match k.check_result {
                CheckResult::NotApplicable => normal += t,
                CheckResult::Fail => detect += t,
                CheckResult::Pass => pass += t,
            }
        }
        GainBreakdown::new(normal, detect, pass)
    }
}

fn validate_mixture<A: AliceStrategy + ?Sized>(alice: &A) -> Result<(), AnalysisError> {
    let not_enumerable = |why: String| AnalysisError::NotEnumerable(alice.name().into(), why);
    let preps = alice.preparations();
    if preps.is_empty() {
        return Err(not_enumerable("no preparations".into()));
    }
    if preps.iter().any(|(w, _)| !w.is_finite() || *w < 0.0) {
        return Err(not_enumerable(
            "weights must be finite and non-negative".into(),
        ));
    }
    let total: f64 = preps.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(not_enumerable(format!("weights sum to {total}")));
    }
    Ok(())
}

/// Resolves a claim rule to the measurement Alice makes on her half, if any.
fn own_measurement<'a, A: AliceStrategy + ?Sized>(
    alice: &A,
    rule: ClaimRule<'a>,
    holds_pair: bool,
) -> Result<Result<StateLabel, &'a MeasurementChoice>, AnalysisError> {
    match rule {
        ClaimRule::Announce(label) => Ok(Ok(label)),
        ClaimRule::Measure { subsystem, choice } => {
            if subsystem != Subsystem::A || !holds_pair {
                return Err(ProtocolError::Violation {
                    strategy: alice.name().into(),
                    reason: "Alice may only measure a subsystem A she kept".into(),
                }
                .into());
            }
            Ok(Err(choice))
        }
    }
}

/// Exact distribution of round transcripts for the given players.
pub fn oracle_transcript<A, B>(
    alice: &A,
    bob: &B,
    params: &ProtocolParams,
) -> Result<TranscriptDistribution, AnalysisError>
where
    A: AliceStrategy + ?Sized,
    B: BobStrategy + ?Sized,
{
    params.validate()?;
    validate_mixture(alice)?;
    let r = params.check_rate;
    let bob_basis = bob.discrimination_basis();
    let mut dist = TranscriptDistribution::default();

    for (w_prep, prep) in alice.preparations() {
        let holds_pair = matches!(prep.register, Register::Pair(_));
        for (w_noise, pauli) in noise_branches(params.noise) {
            if w_noise == 0.0 {
                continue;
            }
            let pair: TwoQubitPure = match pauli {
                Some(p) => prep.register.with_bob_pauli(p).as_pair(),
                None => prep.register.as_pair(),
            };
            let weight = w_prep * w_noise;

            for bob_outcome in Outcome::ALL {
                let guess = bob.guess_for(bob_outcome);
                let mut key = TranscriptKey {
                    round_type: RoundType::Normal,
                    bob_guess: guess,
                    alice_claim: guess,
                    check_result: CheckResult::NotApplicable,
                };
                match own_measurement(alice, alice.claim_rule(prep, guess), holds_pair)? {
                    Ok(label) => {
                        key.alice_claim = label;
                        let prob = pair.marginal_probability(Subsystem::B, bob_basis, bob_outcome);
                        dist.add(key, weight * (1.0 - r) * prob);
                    }
                    Err(choice) => {
                        for own in Outcome::ALL {
                            key.alice_claim = choice.table.label(own);
                            let prob =
                                pair.joint_probability(&choice.basis, own, bob_basis, bob_outcome);
                            dist.add(key, weight * (1.0 - r) * prob);
                        }
                    }
                }
            }

            for guess in StateLabel::ALL {
                let weight = weight * r * 0.5;
                match own_measurement(alice, alice.claim_rule(prep, guess), holds_pair)? {
                    Ok(label) => {
                        let vb = bob.verification_basis(label);
                        for verdict in Outcome::ALL {
                            let prob = pair.marginal_probability(Subsystem::B, &vb, verdict);
                            dist.add(check_key(guess, label, verdict), weight * prob);
                        }
                    }
                    Err(choice) => {
                        for own in Outcome::ALL {
                            let label = choice.table.label(own);
                            let vb = bob.verification_basis(label);
                            for verdict in Outcome::ALL {
                                let prob = pair.joint_probability(&choice.basis, own, &vb, verdict);
                                dist.add(check_key(guess, label, verdict), weight * prob);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(dist)
}

fn check_key(guess: StateLabel, claim: StateLabel, verdict: Outcome) -> TranscriptKey {
    TranscriptKey {
        round_type: RoundType::Check,
        bob_guess: guess,
        alice_claim: claim,
        check_result: match verdict {
            Outcome::Plus => CheckResult::Pass,
            Outcome::Minus => CheckResult::Fail,
        },
    }
}

/// Exact expected per-round gain of `alice` against honest Bob.
pub fn oracle_expected_gain<A: AliceStrategy + ?Sized>(
    alice: &A,
    params: &ProtocolParams,
) -> Result<GainBreakdown, AnalysisError> {
    oracle_expected_gain_with(alice, &honest_bob(), params)
}

pub fn oracle_expected_gain_with<A, B>(
    alice: &A,
    bob: &B,
    params: &ProtocolParams,
) -> Result<GainBreakdown, AnalysisError>
where
    A: AliceStrategy + ?Sized,
    B: BobStrategy + ?Sized,
{
    Ok(oracle_transcript(alice, bob, params)?.gain(params))
}
