//! Round execution, coin settlement, the transit noise channel and the
//! abort rule.
//!
//! A round runs in a fixed order: Alice prepares a register and hands Bob
//! his half, the channel may flip it, Bob privately decides between a normal
//! round (measure now, guess from the outcome) and a checking round (store
//! the qubit, guess at random), Alice answers the guess with a claim, and in
//! checking rounds Bob verifies the stored qubit in the claimed state's
//! eigenbasis before anything is paid. Strategies only describe what they do;
//! the engine performs every measurement, which is how it keeps each party
//! away from the other's subsystem.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::qubit::{MeasurementBasis, Outcome, Pauli, PureQubit, Subsystem, TwoQubitPure};
use crate::strategy::{AliceStrategy, BobStrategy, ClaimRule, Preparation};

/// Minimum number of checking rounds before the abort rule may fire.
pub const MIN_ABORT_SAMPLE: u64 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("check_rate must lie in (0, 1), got {0}")]
    CheckRate(f64),
    #[error("penalty must be positive, got {0}")]
    Penalty(f64),
    #[error("{name} must be positive, got {value}")]
    Payout { name: &'static str, value: f64 },
    #[error("noise must lie in [0, 1), got {0}")]
    Noise(f64),
    #[error("abort_threshold must lie in [0, 1], got {0}")]
    AbortThreshold(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("protocol violation by {strategy}: {reason}")]
    Violation { strategy: String, reason: String },
    #[error("strategy {0} has no preparations to sample from")]
    EmptyStrategy(String),
    #[error("session needs at least one round")]
    NoRounds,
}

/// The two legal states Alice may claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateLabel {
    /// `|0⟩`, verified with `Ŝ_z`
    Zero,
    /// `|0̄⟩`, verified with `Ŝ_x`
    ZeroBar,
}

impl StateLabel {
    pub const ALL: [StateLabel; 2] = [StateLabel::Zero, StateLabel::ZeroBar];

    pub fn state(self) -> PureQubit {
        match self {
            StateLabel::Zero => PureQubit::ZERO,
            StateLabel::ZeroBar => PureQubit::ZERO_BAR,
        }
    }

    /// Eigenbasis in which the claimed state is the `plus` outcome.
    pub fn verification_basis(self) -> MeasurementBasis {
        match self {
            StateLabel::Zero => MeasurementBasis::z(),
            StateLabel::ZeroBar => MeasurementBasis::x(),
        }
    }

    pub fn other(self) -> StateLabel {
        match self {
            StateLabel::Zero => StateLabel::ZeroBar,
            StateLabel::ZeroBar => StateLabel::Zero,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StateLabel::Zero => "zero",
            StateLabel::ZeroBar => "zero_bar",
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StateLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "zero" | "0" => Ok(StateLabel::Zero),
            "zero_bar" | "zerobar" | "0bar" => Ok(StateLabel::ZeroBar),
            other => Err(format!("unknown state label `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RoundType {
    Normal,
    Check,
}

impl RoundType {
    pub fn as_str(self) -> &'static str {
        match self {
            RoundType::Normal => "normal",
            RoundType::Check => "check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckResult {
    Pass,
    Fail,
    NotApplicable,
}

impl CheckResult {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckResult::Pass => "pass",
            CheckResult::Fail => "fail",
            CheckResult::NotApplicable => "not_applicable",
        }
    }
}

/// Public parameters of a game. `check_rate` is known to both players.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub check_rate: f64,
    pub penalty: f64,
    /// Coins Bob pays Alice when he loses; `p/(1−p)` by default.
    pub loss_payout: f64,
    /// Coins Alice pays Bob when he wins; 1 by default.
    pub win_payout: f64,
    pub noise: f64,
    /// Bob aborts once the observed check-fail rate exceeds this. The
    /// default of 1 disables the rule.
    pub abort_threshold: f64,
}

impl ProtocolParams {
    pub fn new(check_rate: f64, penalty: f64) -> Result<Self, ParamError> {
        let params = ProtocolParams {
            check_rate,
            penalty,
            loss_payout: crate::analysis::constants().loss_payout,
            win_payout: 1.0,
            noise: 0.0,
            abort_threshold: 1.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_noise(mut self, noise: f64) -> Result<Self, ParamError> {
        self.noise = noise;
        self.validate().map(|_| self)
    }

    pub fn with_abort_threshold(mut self, threshold: f64) -> Result<Self, ParamError> {
        self.abort_threshold = threshold;
        self.validate().map(|_| self)
    }

    pub fn with_payouts(mut self, loss_payout: f64, win_payout: f64) -> Result<Self, ParamError> {
        self.loss_payout = loss_payout;
        self.win_payout = win_payout;
        self.validate().map(|_| self)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let r = self.check_rate;
        if !(r > 0.0 && r < 1.0) {
            return Err(ParamError::CheckRate(r));
        }
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(ParamError::Penalty(self.penalty));
        }
        for (name, value) in [
            ("loss_payout", self.loss_payout),
            ("win_payout", self.win_payout),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ParamError::Payout { name, value });
            }
        }
        if !(self.noise >= 0.0 && self.noise < 1.0) {
            return Err(ParamError::Noise(self.noise));
        }
        if !(0.0..=1.0).contains(&self.abort_threshold) {
            return Err(ParamError::AbortThreshold(self.abort_threshold));
        }
        Ok(())
    }
}

/// Coins moved by one round; positive means Bob pays Alice.
pub fn settle(
    params: &ProtocolParams,
    bob_guess: StateLabel,
    alice_claim: StateLabel,
    check: CheckResult,
) -> f64 {
    match check {
        CheckResult::Fail => -params.penalty,
        _ if bob_guess == alice_claim => -params.win_payout,
        _ => params.loss_payout,
    }
}

/// One line of the transcript.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub round_type: RoundType,
    pub bob_guess: StateLabel,
    pub alice_claim: StateLabel,
    pub check_result: CheckResult,
    pub transfer: f64,
    /// Outcome of Bob's discrimination measurement; normal rounds only.
    pub bob_measurement_outcome: Option<Outcome>,
}

impl RoundRecord {
    pub fn bob_won(&self) -> bool {
        self.check_result != CheckResult::Fail && self.bob_guess == self.alice_claim
    }
}

/// Running ledger of a session. Bob's total is always `-alice_gain_total`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SessionStats {
    pub rounds: u64,
    pub alice_gain_total: f64,
    /// Sum of squared per-round transfers, for the sample variance.
    pub alice_gain_sq_total: f64,
    pub check_rounds: u64,
    pub check_fails: u64,
    /// Rounds settled in Bob's favour by a correct guess (any round type).
    pub bob_wins: u64,
    pub normal_rounds: u64,
    pub normal_bob_wins: u64,
    pub aborted: bool,
}

impl SessionStats {
    pub fn record(&mut self, rec: &RoundRecord) {
        self.rounds += 1;
        self.alice_gain_total += rec.transfer;
        self.alice_gain_sq_total += rec.transfer * rec.transfer;
        match rec.round_type {
            RoundType::Normal => {
                self.normal_rounds += 1;
                if rec.bob_won() {
                    self.normal_bob_wins += 1;
                }
            }
            RoundType::Check => {
                self.check_rounds += 1;
                if rec.check_result == CheckResult::Fail {
                    self.check_fails += 1;
                }
            }
        }
        if rec.bob_won() {
            self.bob_wins += 1;
        }
    }

    pub fn bob_gain_total(&self) -> f64 {
        -self.alice_gain_total
    }

    /// Bob's win frequency over normal rounds, `None` before the first one.
    pub fn normal_win_rate(&self) -> Option<f64> {
        (self.normal_rounds > 0).then(|| self.normal_bob_wins as f64 / self.normal_rounds as f64)
    }

    pub fn check_fail_rate(&self) -> Option<f64> {
        (self.check_rounds > 0).then(|| self.check_fails as f64 / self.check_rounds as f64)
    }

    fn should_abort(&self, threshold: f64) -> bool {
        self.check_rounds >= MIN_ABORT_SAMPLE
            && (self.check_fails as f64) / (self.check_rounds as f64) > threshold
    }

    pub fn merge(&self, other: &SessionStats) -> SessionStats {
        SessionStats {
            rounds: self.rounds + other.rounds,
            alice_gain_total: self.alice_gain_total + other.alice_gain_total,
            alice_gain_sq_total: self.alice_gain_sq_total + other.alice_gain_sq_total,
            check_rounds: self.check_rounds + other.check_rounds,
            check_fails: self.check_fails + other.check_fails,
            bob_wins: self.bob_wins + other.bob_wins,
            normal_rounds: self.normal_rounds + other.normal_rounds,
            normal_bob_wins: self.normal_bob_wins + other.normal_bob_wins,
            aborted: self.aborted || other.aborted,
        }
    }
}

/// What travels from Alice to Bob: a lone qubit, or subsystem `B` of a pair
/// whose subsystem `A` Alice keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Register {
    Single(PureQubit),
    Pair(TwoQubitPure),
}

impl Register {
    pub fn with_bob_pauli(&self, pauli: Pauli) -> Register {
        match self {
            Register::Single(s) => Register::Single(s.apply_pauli(pauli)),
            Register::Pair(p) => Register::Pair(p.apply_pauli(Subsystem::B, pauli)),
        }
    }

    /// Bloch vector of Bob's qubit before anyone measures.
    pub fn bob_bloch(&self) -> crate::qubit::BlochVector {
        match self {
            Register::Single(s) => s.bloch(),
            Register::Pair(p) => p.reduced_bloch(Subsystem::B),
        }
    }

    /// Embeds a lone qubit as `|0⟩_A ⊗ |s⟩_B` so both shapes can be treated
    /// as pairs.
    pub fn as_pair(&self) -> TwoQubitPure {
        match self {
            Register::Single(s) => TwoQubitPure::product(&PureQubit::ZERO, s),
            Register::Pair(p) => *p,
        }
    }
}

/// The four branches of the transit channel: identity with probability
/// `1 − ε`, each of X, Y, Z with probability `ε/3`.
pub fn noise_branches(noise: f64) -> [(f64, Option<Pauli>); 4] {
    let flip = noise / 3.0;
    [
        (1.0 - noise, None),
        (flip, Some(Pauli::X)),
        (flip, Some(Pauli::Y)),
        (flip, Some(Pauli::Z)),
    ]
}

pub fn sample_noise<R: Rng + ?Sized>(noise: f64, rng: &mut R) -> Option<Pauli> {
    if noise <= 0.0 || !rng.random_bool(noise) {
        return None;
    }
    Some(Pauli::ALL[rng.random_range(0..3)])
}

/// Passes a qubit through the transit channel.
pub fn apply_noise<R: Rng + ?Sized>(s: &PureQubit, noise: f64, rng: &mut R) -> PureQubit {
    match sample_noise(noise, rng) {
        Some(p) => s.apply_pauli(p),
        None => *s,
    }
}

/// Independent stream for session `index` under `master_seed`. The stream id
/// is the session counter, so sessions can be run in any order or in
/// parallel and still reproduce the serial result.
pub fn session_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

fn pick<'a, R: Rng + ?Sized>(
    preps: &'a [(f64, Preparation)],
    rng: &mut R,
) -> Option<&'a Preparation> {
    match preps {
        [] => None,
        [(_, only)] => Some(only),
        _ => {
            let mut u = rng.random::<f64>();
            for (w, prep) in preps {
                if u < *w {
                    return Some(prep);
                }
                u -= w;
            }
            preps.last().map(|(_, p)| p)
        }
    }
}

fn violation(alice: &(impl AliceStrategy + ?Sized), reason: &str) -> ProtocolError {
    ProtocolError::Violation {
        strategy: alice.name().to_string(),
        reason: reason.to_string(),
    }
}

/// Plays one round.
pub fn run_round<A, B, R>(
    alice: &A,
    bob: &B,
    params: &ProtocolParams,
    rng: &mut R,
) -> Result<RoundRecord, ProtocolError>
where
    A: AliceStrategy + ?Sized,
    B: BobStrategy + ?Sized,
    R: Rng + ?Sized,
{
    params.validate()?;
    play(alice, bob, params, rng)
}

fn play<A, B, R>(
    alice: &A,
    bob: &B,
    params: &ProtocolParams,
    rng: &mut R,
) -> Result<RoundRecord, ProtocolError>
where
    A: AliceStrategy + ?Sized,
    B: BobStrategy + ?Sized,
    R: Rng + ?Sized,
{
    let prep = pick(alice.preparations(), rng)
        .ok_or_else(|| ProtocolError::EmptyStrategy(alice.name().to_string()))?;
    let mut register = prep.register;
    if let Some(pauli) = sample_noise(params.noise, rng) {
        register = register.with_bob_pauli(pauli);
    }

    if !rng.random_bool(params.check_rate) {
        let basis = bob.discrimination_basis();
        let (outcome, alice_side) = match register {
            Register::Single(s) => (basis.measure(&s, rng).0, None),
            Register::Pair(pair) => {
                let (o, rest) = pair.measure_subsystem(Subsystem::B, basis, rng);
                (o, Some(rest))
            }
        };
        let guess = bob.guess_for(outcome);
        let claim = match alice.claim_rule(prep, guess) {
            ClaimRule::Announce(label) => label,
            ClaimRule::Measure { subsystem, choice } => {
                if subsystem != Subsystem::A {
                    return Err(violation(alice, "Alice may only measure subsystem A"));
                }
                let own = alice_side
                    .ok_or_else(|| violation(alice, "Alice kept no subsystem to measure"))?;
                choice.table.label(choice.basis.measure(&own, rng).0)
            }
        };
        return Ok(RoundRecord {
            round_type: RoundType::Normal,
            bob_guess: guess,
            alice_claim: claim,
            check_result: CheckResult::NotApplicable,
            transfer: settle(params, guess, claim, CheckResult::NotApplicable),
            bob_measurement_outcome: Some(outcome),
        });
    }

    // Checking round: Bob stores his qubit and guesses blindly.
    let guess = if rng.random_bool(0.5) {
        StateLabel::Zero
    } else {
        StateLabel::ZeroBar
    };
    let (claim, stored) = match alice.claim_rule(prep, guess) {
        ClaimRule::Announce(label) => (label, register),
        ClaimRule::Measure { subsystem, choice } => {
            if subsystem != Subsystem::A {
                return Err(violation(alice, "Alice may only measure subsystem A"));
            }
            let Register::Pair(pair) = register else {
                return Err(violation(alice, "Alice kept no subsystem to measure"));
            };
            let (o, bob_side) = pair.measure_subsystem(Subsystem::A, &choice.basis, rng);
            (choice.table.label(o), Register::Single(bob_side))
        }
    };
    let basis = bob.verification_basis(claim);
    let verdict = match stored {
        Register::Single(s) => basis.measure(&s, rng).0,
        Register::Pair(pair) => pair.measure_subsystem(Subsystem::B, &basis, rng).0,
    };
    let check = match verdict {
        Outcome::Plus => CheckResult::Pass,
        Outcome::Minus => CheckResult::Fail,
    };
    Ok(RoundRecord {
        round_type: RoundType::Check,
        bob_guess: guess,
        alice_claim: claim,
        check_result: check,
        transfer: settle(params, guess, claim, check),
        bob_measurement_outcome: None,
    })
}

/// Plays up to `n_rounds` rounds, stopping early if Bob aborts.
pub fn run_session<A, B, R>(
    alice: &A,
    bob: &B,
    params: &ProtocolParams,
    n_rounds: u64,
    rng: &mut R,
) -> Result<SessionStats, ProtocolError>
where
    A: AliceStrategy + ?Sized,
    B: BobStrategy + ?Sized,
    R: Rng + ?Sized,
{
    run_session_observed(alice, bob, params, n_rounds, rng, |_| {})
}

/// [`run_session`] that also hands every record to `observe`, e.g. for
/// transcript export.
pub fn run_session_observed<A, B, R, F>(
    alice: &A,
    bob: &B,
    params: &ProtocolParams,
    n_rounds: u64,
    rng: &mut R,
    mut observe: F,
) -> Result<SessionStats, ProtocolError>
where
    A: AliceStrategy + ?Sized,
    B: BobStrategy + ?Sized,
    R: Rng + ?Sized,
    F: FnMut(&RoundRecord),
{
    if n_rounds == 0 {
        return Err(ProtocolError::NoRounds);
    }
    params.validate()?;
    let mut stats = SessionStats::default();
    for _ in 0..n_rounds {
        let rec = play(alice, bob, params, rng)?;
        observe(&rec);
        stats.record(&rec);
        if rec.round_type == RoundType::Check && stats.should_abort(params.abort_threshold) {
            stats.aborted = true;
            break;
        }
    }
    Ok(stats)
}
