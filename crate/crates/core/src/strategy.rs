//! Alice and Bob strategies.
//!
//! A strategy is a declarative description rather than a callback: Alice
//! lists the finite mixture of registers she may send and, for each
//! preparation and announced guess, either a label to claim or a measurement
//! on her own subsystem whose outcome picks the label. Bob names his
//! discrimination measurement and how outcomes map to guesses. The engine in
//! [`crate::protocol`] samples these descriptions and the oracle in
//! [`crate::analysis`] enumerates them, so both always agree on what a
//! strategy does.

use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

use crate::protocol::{Register, StateLabel};
use crate::qubit::{
    BlochVector, Ensemble, MeasurementBasis, Outcome, PureQubit, Subsystem, TwoQubitPure,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("theta must lie in [0, π], got {0}")]
    Theta(f64),
    #[error("phi must lie in [0, 2π), got {0}")]
    Phi(f64),
    #[error("ensemble has {members} members but {labels} claim labels")]
    LabelCount { members: usize, labels: usize },
}

/// One entry of Alice's preparation mixture. `memo` is private bookkeeping
/// that comes back to the strategy when it has to claim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preparation {
    pub register: Register,
    pub memo: usize,
}

impl Preparation {
    pub fn new(register: Register, memo: usize) -> Self {
        Preparation { register, memo }
    }
}

/// Maps Alice's measurement outcome to the label she claims.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutcomeTable {
    pub on_plus: StateLabel,
    pub on_minus: StateLabel,
}

impl OutcomeTable {
    /// Plus → Zero, minus → ZeroBar. For `Ŝ_z` on the attack pair this
    /// claims exactly the state Bob holds.
    pub const TRUTHFUL: OutcomeTable = OutcomeTable {
        on_plus: StateLabel::Zero,
        on_minus: StateLabel::ZeroBar,
    };

    pub fn label(&self, outcome: Outcome) -> StateLabel {
        match outcome {
            Outcome::Plus => self.on_plus,
            Outcome::Minus => self.on_minus,
        }
    }

    /// All four tables.
    pub fn all() -> [OutcomeTable; 4] {
        let mut out = [Self::TRUTHFUL; 4];
        let mut i = 0;
        for on_plus in StateLabel::ALL {
            for on_minus in StateLabel::ALL {
                out[i] = OutcomeTable { on_plus, on_minus };
                i += 1;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementChoice {
    pub basis: MeasurementBasis,
    pub table: OutcomeTable,
}

impl MeasurementChoice {
    pub fn new(basis: MeasurementBasis, table: OutcomeTable) -> Self {
        MeasurementChoice { basis, table }
    }
}

/// How Alice answers Bob's guess.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClaimRule<'a> {
    Announce(StateLabel),
    /// Measure one of the register's subsystems and claim by outcome. Only
    /// `Subsystem::A` of a pair register is legal.
    Measure {
        subsystem: Subsystem,
        choice: &'a MeasurementChoice,
    },
}

pub trait AliceStrategy: Send + Sync {
    fn name(&self) -> &str;

    /// Finite mixture of preparations; weights sum to one.
    fn preparations(&self) -> &[(f64, Preparation)];

    fn claim_rule(&self, prep: &Preparation, bob_guess: StateLabel) -> ClaimRule<'_>;

    /// Bloch vector of Bob's reduced state before anyone measures.
    fn bob_reduced_bloch(&self) -> BlochVector {
        self.preparations()
            .iter()
            .fold(BlochVector::ORIGIN, |acc, (w, p)| {
                acc.add(&p.register.bob_bloch().scaled(*w))
            })
    }
}

pub trait BobStrategy: Send + Sync {
    fn name(&self) -> &str;

    /// Measurement performed in normal rounds.
    fn discrimination_basis(&self) -> &MeasurementBasis;

    fn guess_for(&self, outcome: Outcome) -> StateLabel;

    fn verification_basis(&self, claim: StateLabel) -> MeasurementBasis {
        claim.verification_basis()
    }
}

impl<T: AliceStrategy + ?Sized> AliceStrategy for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn preparations(&self) -> &[(f64, Preparation)] {
        (**self).preparations()
    }
    fn claim_rule(&self, prep: &Preparation, bob_guess: StateLabel) -> ClaimRule<'_> {
        (**self).claim_rule(prep, bob_guess)
    }
    fn bob_reduced_bloch(&self) -> BlochVector {
        (**self).bob_reduced_bloch()
    }
}

/// Sends `|0⟩` or `|0̄⟩` with equal probability and claims the truth.
#[derive(Debug, Clone)]
pub struct HonestAlice {
    preps: Vec<(f64, Preparation)>,
}

pub fn honest_alice() -> HonestAlice {
    let preps = StateLabel::ALL
        .iter()
        .enumerate()
        .map(|(i, l)| (0.5, Preparation::new(Register::Single(l.state()), i)))
        .collect();
    HonestAlice { preps }
}

impl AliceStrategy for HonestAlice {
    fn name(&self) -> &str {
        "honest"
    }

    fn preparations(&self) -> &[(f64, Preparation)] {
        &self.preps
    }

    fn claim_rule(&self, prep: &Preparation, _: StateLabel) -> ClaimRule<'_> {
        ClaimRule::Announce(StateLabel::ALL[prep.memo])
    }
}

/// Measures normal rounds in a fixed basis and guesses by outcome.
#[derive(Debug, Clone)]
pub struct HonestBob {
    basis: MeasurementBasis,
    table: OutcomeTable,
}

/// Bob with the minimum-error measurement: `|0̃⟩` → Zero, `|1̃⟩` → ZeroBar.
pub fn honest_bob() -> HonestBob {
    HonestBob {
        basis: MeasurementBasis::optimal(),
        table: OutcomeTable::TRUTHFUL,
    }
}

impl HonestBob {
    /// Bob measuring some other basis; used to confirm the optimal one wins.
    pub fn with_basis(basis: MeasurementBasis, table: OutcomeTable) -> Self {
        HonestBob { basis, table }
    }
}

impl BobStrategy for HonestBob {
    fn name(&self) -> &str {
        "honest"
    }

    fn discrimination_basis(&self) -> &MeasurementBasis {
        &self.basis
    }

    fn guess_for(&self, outcome: Outcome) -> StateLabel {
        self.table.label(outcome)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimPolicy {
    Zero,
    ZeroBar,
    /// Whichever legal state overlaps more with the prepared one; ties go
    /// to Zero.
    Nearest,
}

impl ClaimPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            ClaimPolicy::Zero => "zero",
            ClaimPolicy::ZeroBar => "zero_bar",
            ClaimPolicy::Nearest => "nearest",
        }
    }

    pub fn resolve(self, state: &PureQubit) -> StateLabel {
        match self {
            ClaimPolicy::Zero => StateLabel::Zero,
            ClaimPolicy::ZeroBar => StateLabel::ZeroBar,
            ClaimPolicy::Nearest => {
                let to_zero = state.overlap(&PureQubit::ZERO);
                let to_bar = state.overlap(&PureQubit::ZERO_BAR);
                if to_zero + 1e-12 >= to_bar {
                    StateLabel::Zero
                } else {
                    StateLabel::ZeroBar
                }
            }
        }
    }
}

impl std::str::FromStr for ClaimPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nearest" => Ok(ClaimPolicy::Nearest),
            other => other
                .parse::<StateLabel>()
                .map(|l| match l {
                    StateLabel::Zero => ClaimPolicy::Zero,
                    StateLabel::ZeroBar => ClaimPolicy::ZeroBar,
                })
                .map_err(|_| format!("unknown claim policy `{other}`")),
        }
    }
}

/// A cheating state on the Bloch sphere plus the claim Alice pairs with it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheatPoint {
    theta: f64,
    phi: f64,
    claim_policy: ClaimPolicy,
}

impl CheatPoint {
    pub fn new(theta: f64, phi: f64, claim_policy: ClaimPolicy) -> Result<Self, StrategyError> {
        if !(0.0..=PI).contains(&theta) {
            return Err(StrategyError::Theta(theta));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(StrategyError::Phi(phi));
        }
        Ok(CheatPoint {
            theta,
            phi,
            claim_policy,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn claim_policy(&self) -> ClaimPolicy {
        self.claim_policy
    }

    pub fn state(&self) -> PureQubit {
        PureQubit::from_bloch(self.theta, self.phi)
    }

    pub fn claim(&self) -> StateLabel {
        self.claim_policy.resolve(&self.state())
    }
}

/// Sends the same state every round and always claims the same label.
#[derive(Debug, Clone)]
pub struct FixedStateCheat {
    point: CheatPoint,
    claim: StateLabel,
    preps: [(f64, Preparation); 1],
}

pub fn fixed_state_cheat(point: CheatPoint) -> FixedStateCheat {
    let state = point.state();
    FixedStateCheat {
        point,
        claim: point.claim_policy.resolve(&state),
        preps: [(1.0, Preparation::new(Register::Single(state), 0))],
    }
}

impl FixedStateCheat {
    pub fn point(&self) -> &CheatPoint {
        &self.point
    }

    pub fn claim(&self) -> StateLabel {
        self.claim
    }
}

impl AliceStrategy for FixedStateCheat {
    fn name(&self) -> &str {
        "fixed_state"
    }

    fn preparations(&self) -> &[(f64, Preparation)] {
        &self.preps
    }

    fn claim_rule(&self, _: &Preparation, _: StateLabel) -> ClaimRule<'_> {
        ClaimRule::Announce(self.claim)
    }
}

/// Samples a member of an ensemble each round and claims that member's label.
#[derive(Debug, Clone)]
pub struct EnsembleCheat {
    ensemble: Ensemble,
    claims: Vec<StateLabel>,
    preps: Vec<(f64, Preparation)>,
}

pub fn ensemble_cheat(
    ensemble: Ensemble,
    claims: Vec<StateLabel>,
) -> Result<EnsembleCheat, StrategyError> {
    if claims.len() != ensemble.len() {
        return Err(StrategyError::LabelCount {
            members: ensemble.len(),
            labels: claims.len(),
        });
    }
    let preps = ensemble
        .entries()
        .iter()
        .enumerate()
        .map(|(i, (w, s))| (*w, Preparation::new(Register::Single(*s), i)))
        .collect();
    Ok(EnsembleCheat {
        ensemble,
        claims,
        preps,
    })
}

impl EnsembleCheat {
    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn claims(&self) -> &[StateLabel] {
        &self.claims
    }
}

impl AliceStrategy for EnsembleCheat {
    fn name(&self) -> &str {
        "ensemble"
    }

    fn preparations(&self) -> &[(f64, Preparation)] {
        &self.preps
    }

    fn claim_rule(&self, prep: &Preparation, _: StateLabel) -> ClaimRule<'_> {
        ClaimRule::Announce(self.claims[prep.memo])
    }
}

/// Alice's measurement on her half, chosen after hearing Bob's guess.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisPolicy {
    pub after_zero: MeasurementChoice,
    pub after_zero_bar: MeasurementChoice,
}

impl BasisPolicy {
    pub fn constant(choice: MeasurementChoice) -> Self {
        BasisPolicy {
            after_zero: choice.clone(),
            after_zero_bar: choice,
        }
    }

    /// Always `Ŝ_z` with the truthful table.
    pub fn always_z() -> Self {
        Self::constant(MeasurementChoice::new(
            MeasurementBasis::z(),
            OutcomeTable::TRUTHFUL,
        ))
    }

    pub fn always_x(table: OutcomeTable) -> Self {
        Self::constant(MeasurementChoice::new(MeasurementBasis::x(), table))
    }

    pub fn choice_for(&self, guess: StateLabel) -> &MeasurementChoice {
        match guess {
            StateLabel::Zero => &self.after_zero,
            StateLabel::ZeroBar => &self.after_zero_bar,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.after_zero == self.after_zero_bar
    }
}

/// `(|0⟩_A|0⟩_B + |1⟩_A|0̄⟩_B)/√2`
pub fn attack_pair() -> TwoQubitPure {
    TwoQubitPure::correlated(&PureQubit::ZERO, &PureQubit::ZERO_BAR)
}

/// Sends half of an entangled pair and picks her measurement on the other
/// half after hearing Bob's guess.
#[derive(Debug, Clone)]
pub struct EntangledCheat {
    policy: BasisPolicy,
    preps: [(f64, Preparation); 1],
}

pub fn entangled_cheat(policy: BasisPolicy) -> EntangledCheat {
    EntangledCheat::with_resource(attack_pair(), policy)
}

impl EntangledCheat {
    /// Same attack on an arbitrary two-qubit resource.
    pub fn with_resource(pair: TwoQubitPure, policy: BasisPolicy) -> Self {
        EntangledCheat {
            policy,
            preps: [(1.0, Preparation::new(Register::Pair(pair), 0))],
        }
    }

    pub fn policy(&self) -> &BasisPolicy {
        &self.policy
    }

    pub fn resource(&self) -> TwoQubitPure {
        match self.preps[0].1.register {
            Register::Pair(p) => p,
            Register::Single(_) => unreachable!("entangled cheat always holds a pair"),
        }
    }

    /// The non-entangled strategy Alice would be playing if she measured
    /// first with the choice she makes after `guess`. When the policy is
    /// constant the two strategies are indistinguishable to Bob.
    pub fn induced_ensemble(&self, guess: StateLabel) -> EnsembleCheat {
        let choice = self.policy.choice_for(guess);
        let pair = self.resource();
        let mut members = Vec::with_capacity(2);
        let mut claims = Vec::with_capacity(2);
        for outcome in Outcome::ALL {
            if let (w, Some(bob_state)) = pair.project(Subsystem::A, &choice.basis, outcome) {
                members.push((w, bob_state));
                claims.push(choice.table.label(outcome));
            }
        }
        // renormalize against rounding so the ensemble validates
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        members.iter_mut().for_each(|(w, _)| *w /= total);
        ensemble_cheat(
            Ensemble::new(members).expect("projective branches form an ensemble"),
            claims,
        )
        .expect("one label per branch")
    }
}

impl AliceStrategy for EntangledCheat {
    fn name(&self) -> &str {
        "entangled"
    }

    fn preparations(&self) -> &[(f64, Preparation)] {
        &self.preps
    }

    fn claim_rule(&self, _: &Preparation, bob_guess: StateLabel) -> ClaimRule<'_> {
        ClaimRule::Measure {
            subsystem: Subsystem::A,
            choice: self.policy.choice_for(bob_guess),
        }
    }
}

/// Grid of `n` evenly spaced polar angles covering `[0, π/2]` inclusive.
pub fn zx_quadrant_grid(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| FRAC_PI_2 * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{run_session, session_rng, ProtocolParams};
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    #[test]
    fn honest_alice_prepares_both_states_evenly() {
        let a = honest_alice();
        let preps = a.preparations();
        assert_eq!(preps.len(), 2);
        for (i, (w, p)) in preps.iter().enumerate() {
            assert_eq!(*w, 0.5);
            assert_eq!(p.register, Register::Single(StateLabel::ALL[i].state()));
            for g in StateLabel::ALL {
                assert_eq!(a.claim_rule(p, g), ClaimRule::Announce(StateLabel::ALL[i]));
            }
        }
    }

    #[test]
    fn honest_alice_sampling_frequency() {
        let a = honest_alice();
        let mut rng = session_rng(21, 0);
        let n = 100_000;
        // route through the engine's sampler by observing claims, which are truthful
        let mut zeros = 0u64;
        let p = ProtocolParams::new(0.5, 10.0).unwrap();
        crate::protocol::run_session_observed(&a, &honest_bob(), &p, n, &mut rng, |rec| {
            if rec.alice_claim == StateLabel::Zero {
                zeros += 1;
            }
        })
        .unwrap();
        let sigma = (0.25 / n as f64).sqrt();
        assert!((zeros as f64 / n as f64 - 0.5).abs() < 5.0 * sigma);
    }

    #[test]
    fn nearest_claim() {
        let near_zero = CheatPoint::new(0.3, 0.0, ClaimPolicy::Nearest).unwrap();
        assert_eq!(near_zero.claim(), StateLabel::Zero);
        let near_bar = CheatPoint::new(1.3, 0.0, ClaimPolicy::Nearest).unwrap();
        assert_eq!(near_bar.claim(), StateLabel::ZeroBar);
        // symmetric point between |0⟩ and |0̄⟩
        let tie = CheatPoint::new(FRAC_PI_4, 0.0, ClaimPolicy::Nearest).unwrap();
        assert_eq!(tie.claim(), StateLabel::Zero);
        assert_eq!(fixed_state_cheat(tie).claim(), StateLabel::Zero);
    }

    #[test]
    fn cheat_point_validation() {
        assert_eq!(
            CheatPoint::new(9.0, 0.0, ClaimPolicy::Zero),
            Err(StrategyError::Theta(9.0))
        );
        assert!(CheatPoint::new(0.1, 2.0 * PI, ClaimPolicy::Zero).is_err());
        assert!(CheatPoint::new(f64::NAN, 0.0, ClaimPolicy::Zero).is_err());
        assert!(CheatPoint::new(PI, 0.0, ClaimPolicy::Zero).is_ok());
    }

    #[test]
    fn ensemble_label_count_must_match() {
        let e = Ensemble::new(vec![(1.0, PureQubit::ZERO)]).unwrap();
        assert_eq!(
            ensemble_cheat(e, vec![]).unwrap_err(),
            StrategyError::LabelCount {
                members: 1,
                labels: 0
            }
        );
    }

    #[test]
    fn honest_bob_guesses() {
        let bob = honest_bob();
        assert_eq!(bob.guess_for(Outcome::Plus), StateLabel::Zero);
        assert_eq!(bob.guess_for(Outcome::Minus), StateLabel::ZeroBar);
        let p = PureQubit::tilde_one().overlap(&PureQubit::ZERO_BAR);
        assert!((p - std::f64::consts::FRAC_PI_8.cos().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn x_policy_induces_alpha_beta_ensemble() {
        let cheat = entangled_cheat(BasisPolicy::always_x(OutcomeTable::TRUTHFUL));
        let induced = cheat.induced_ensemble(StateLabel::Zero);
        let entries = induced.ensemble().entries();
        assert!((entries[0].0 - (2.0 + SQRT_2) / 4.0).abs() < 1e-12);
        assert!((entries[1].0 - (2.0 - SQRT_2) / 4.0).abs() < 1e-12);
        let alpha = PureQubit::from_real(1.0 + SQRT_2 / 2.0, SQRT_2 / 2.0).unwrap();
        assert!(entries[0].1.approx_eq(&alpha, 1e-12));
        assert!(
            (entries[0].1.overlap(&PureQubit::ONE) - 1.0 / (2.0 * (2.0 + SQRT_2))).abs() < 1e-12
        );
        assert!(
            (induced
                .ensemble()
                .average_bloch()
                .max_abs_diff(&BlochVector::new(0.5, 0.0, 0.5)))
                < 1e-12
        );
    }

    #[test]
    fn declared_bob_state_matches_every_strategy() {
        let target = BlochVector::new(0.5, 0.0, 0.5);
        assert!(honest_alice().bob_reduced_bloch().max_abs_diff(&target) < 1e-12);
        for policy in [
            BasisPolicy::always_z(),
            BasisPolicy::always_x(OutcomeTable::TRUTHFUL),
        ] {
            let cheat = entangled_cheat(policy);
            assert!(cheat.bob_reduced_bloch().max_abs_diff(&target) < 1e-12);
            for g in StateLabel::ALL {
                let e = cheat.induced_ensemble(g);
                assert!(e.bob_reduced_bloch().max_abs_diff(&target) < 1e-12);
            }
        }
    }

    #[test]
    fn identical_streams_reproduce_sessions() {
        let p = ProtocolParams::new(0.2, 100.0).unwrap();
        let cheat = entangled_cheat(BasisPolicy::always_x(OutcomeTable::TRUTHFUL));
        let a = run_session(&cheat, &honest_bob(), &p, 3000, &mut session_rng(4, 2)).unwrap();
        let b = run_session(&cheat, &honest_bob(), &p, 3000, &mut session_rng(4, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quadrant_grid_endpoints() {
        let g = zx_quadrant_grid(100);
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 0.0);
        assert!((g[99] - FRAC_PI_2).abs() < 1e-15);
    }
}
