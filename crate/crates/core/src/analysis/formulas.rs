//! Closed-form gains, bounds and optima.
//!
//! Conventions: `r` is the check rate, `penalty` is `R`, `p = cos²(π/8)` is
//! Bob's best correct-guess probability and `α = cos(π/8)·sin(π/8)`. Angles
//! `theta` parameterize in-plane states `cos(θ/2)|0⟩ + sin(θ/2)|1⟩`.

use std::f64::consts::FRAC_PI_8;

use super::GainBreakdown;
use crate::protocol::StateLabel;
use crate::qubit::PureQubit;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// `cos²(π/8)`
    pub p: f64,
    /// `p/(1 − p) = 3 + 2√2`
    pub loss_payout: f64,
    /// `cos(π/8)·sin(π/8) = √2/4`
    pub alpha: f64,
}

pub fn constants() -> Constants {
    let (s, c) = FRAC_PI_8.sin_cos();
    let p = c * c;
    Constants {
        p,
        loss_payout: p / (1.0 - p),
        alpha: c * s,
    }
}

/// Exact expected gain of Alice sending the in-plane state at `theta` every
/// round and always claiming `claim`, against honest Bob with default
/// payouts.
pub fn exact_cheat_gain(theta: f64, r: f64, penalty: f64, claim: StateLabel) -> GainBreakdown {
    let k = constants().loss_payout;
    let half = theta / 2.0;
    let shifted = FRAC_PI_8 + half;
    // (Bob guesses right, Bob guesses wrong, check flags her, check passes)
    let (right, wrong, flagged, kept) = match claim {
        StateLabel::Zero => (
            shifted.cos().powi(2),
            shifted.sin().powi(2),
            half.sin().powi(2),
            half.cos().powi(2),
        ),
        StateLabel::ZeroBar => (
            shifted.sin().powi(2),
            shifted.cos().powi(2),
            (1.0 - theta.sin()) / 2.0,
            (1.0 + theta.sin()) / 2.0,
        ),
    };
    GainBreakdown::new(
        (1.0 - r) * (-right + wrong * k),
        -r * flagged * penalty,
        r * kept * (k - 1.0) / 2.0,
    )
}

/// [`exact_cheat_gain`] for an arbitrary (possibly out-of-plane) state.
pub fn exact_cheat_gain_for_state(
    state: &PureQubit,
    r: f64,
    penalty: f64,
    claim: StateLabel,
) -> GainBreakdown {
    let k = constants().loss_payout;
    let to_tilde0 = PureQubit::tilde_zero().overlap(state);
    let to_tilde1 = PureQubit::tilde_one().overlap(state);
    let (right, wrong) = match claim {
        StateLabel::Zero => (to_tilde0, to_tilde1),
        StateLabel::ZeroBar => (to_tilde1, to_tilde0),
    };
    let kept = claim.state().overlap(state);
    let flagged = claim.state().orthogonal().overlap(state);
    GainBreakdown::new(
        (1.0 - r) * (-right + wrong * k),
        -r * flagged * penalty,
        r * kept * (k - 1.0) / 2.0,
    )
}

/// Worst-case ceiling on Alice's gain when she claims `claim` for `state`:
/// `p/(1−p) − (r/2)·|⟨claim⊥|state⟩|²·R`. The `r/2` factor is the floor on
/// her posterior belief that Bob kept the qubit unmeasured.
pub fn claim_gain_bound(state: &PureQubit, r: f64, penalty: f64, claim: StateLabel) -> f64 {
    let flagged = claim.state().orthogonal().overlap(state);
    constants().loss_payout - 0.5 * r * flagged * penalty
}

/// Small-angle bound `α/(1−p)·θ − (rR/4)·θ² + 3r` on the Zero-claim cheat.
pub fn linearized_gain_bound(theta: f64, r: f64, penalty: f64) -> f64 {
    let c = constants();
    c.alpha / (1.0 - c.p) * theta - r * penalty / 4.0 * theta * theta + 3.0 * r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub theta_star: f64,
    pub g_max: f64,
}

/// Maximizer and maximum of [`linearized_gain_bound`].
pub fn linearized_optimum(r: f64, penalty: f64) -> Optimum {
    let c = constants();
    let slope = c.alpha / (1.0 - c.p);
    Optimum {
        theta_star: 2.0 * slope / (r * penalty),
        g_max: slope * slope / (r * penalty) + 3.0 * r,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckRateOptimum {
    /// Check rate minimizing Alice's best linearized gain.
    pub check_rate: f64,
    /// Alice's best linearized gain at that rate, `∝ 1/√R`.
    pub gain_cap: f64,
}

pub fn optimal_check_rate(penalty: f64) -> CheckRateOptimum {
    let c = constants();
    let slope = c.alpha / (1.0 - c.p);
    CheckRateOptimum {
        check_rate: slope / (3.0 * penalty).sqrt(),
        gain_cap: 2.0 * 3f64.sqrt() * slope / penalty.sqrt(),
    }
}

/// Alice's posterior that Bob skipped the measurement this round, given his
/// announced guess and that she sent `state`.
pub fn unmeasured_posterior_for_state(state: &PureQubit, r: f64, guess: StateLabel) -> f64 {
    let basis_state = match guess {
        StateLabel::Zero => PureQubit::tilde_zero(),
        StateLabel::ZeroBar => PureQubit::tilde_one(),
    };
    let unmeasured = r / 2.0;
    unmeasured / (unmeasured + (1.0 - r) * basis_state.overlap(state))
}

/// [`unmeasured_posterior_for_state`] for the in-plane state at `theta`.
pub fn unmeasured_posterior(theta: f64, r: f64, guess: StateLabel) -> f64 {
    unmeasured_posterior_for_state(&PureQubit::from_bloch(theta, 0.0), r, guess)
}
