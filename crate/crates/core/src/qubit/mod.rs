//! Exact single- and two-qubit pure-state arithmetic.
//!
//! States are stored as complex amplitudes with a fixed global phase so that
//! two states describing the same ray compare equal up to rounding: the
//! `|0⟩` amplitude is real and non-negative whenever it is non-negligible,
//! otherwise the `|1⟩` amplitude is. Mixed states never appear as density
//! matrices here; they are carried either as [`Ensemble`]s or as the
//! [`BlochVector`] of a reduced state.

mod pair;

use std::borrow::Cow;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_8};
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

pub use pair::{Subsystem, TwoQubitPure};

/// A single complex amplitude.
pub type ComplexAmp = Complex64;

/// Tolerance on construction-time invariants (normalization, orthogonality).
pub const STATE_TOL: f64 = 1e-12;

/// Below this modulus the `|0⟩` amplitude no longer fixes the global phase.
const PHASE_PIVOT: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("amplitudes must be finite")]
    NonFinite,
    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),
    #[error("cannot normalize the zero vector")]
    ZeroVector,
    #[error("basis states are not orthogonal: |<plus|minus>| = {0}")]
    NotOrthogonal(f64),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
}

/// Which projector of a two-outcome measurement fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Plus => "plus",
            Outcome::Minus => "minus",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// Image of the amplitude pair `(a, b)` under this operator.
    pub(crate) fn act(self, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        let i = Complex64::i();
        match self {
            Pauli::X => (b, a),
            Pauli::Y => (-i * b, i * a),
            Pauli::Z => (a, -b),
        }
    }
}

/// Normalized single-qubit pure state `amp0|0⟩ + amp1|1⟩` in canonical phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubit {
    amp0: Complex64,
    amp1: Complex64,
}

impl PureQubit {
    /// `|0⟩`
    pub const ZERO: PureQubit = PureQubit::real(1.0, 0.0);
    /// `|1⟩`
    pub const ONE: PureQubit = PureQubit::real(0.0, 1.0);
    /// `|0̄⟩ = (|0⟩ + |1⟩)/√2`
    pub const ZERO_BAR: PureQubit = PureQubit::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
    /// `|1̄⟩ = (|0⟩ − |1⟩)/√2`
    pub const ONE_BAR: PureQubit = PureQubit::real(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);

    const fn real(a: f64, b: f64) -> Self {
        PureQubit {
            amp0: Complex64::new(a, 0.0),
            amp1: Complex64::new(b, 0.0),
        }
    }

    /// Builds a state from amplitudes that must already be normalized.
    pub fn new(amp0: ComplexAmp, amp1: ComplexAmp) -> Result<Self, StateError> {
        check_finite(&[amp0, amp1])?;
        let norm_sq = amp0.norm_sqr() + amp1.norm_sqr();
        if (norm_sq - 1.0).abs() > STATE_TOL {
            return Err(StateError::NotNormalized(norm_sq));
        }
        Ok(Self::canonical(amp0, amp1))
    }

    /// Builds a state from arbitrary non-zero amplitudes, normalizing them.
    pub fn from_unnormalized(amp0: ComplexAmp, amp1: ComplexAmp) -> Result<Self, StateError> {
        check_finite(&[amp0, amp1])?;
        if amp0.norm_sqr() + amp1.norm_sqr() == 0.0 {
            return Err(StateError::ZeroVector);
        }
        Ok(Self::canonical(amp0, amp1))
    }

    /// Real-amplitude convenience constructor; normalizes its input.
    pub fn from_real(a: f64, b: f64) -> Result<Self, StateError> {
        Self::from_unnormalized(Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    }

    /// `|0̃⟩`, Bloch vector `(ẑ − x̂)/√2`: `cos(π/8)|0⟩ − sin(π/8)|1⟩`.
    pub fn tilde_zero() -> Self {
        Self::real(FRAC_PI_8.cos(), -FRAC_PI_8.sin())
    }

    /// `|1̃⟩`, Bloch vector `(x̂ − ẑ)/√2`: `sin(π/8)|0⟩ + cos(π/8)|1⟩`.
    pub fn tilde_one() -> Self {
        Self::real(FRAC_PI_8.sin(), FRAC_PI_8.cos())
    }

    /// State with Bloch vector `(sinθ cosφ, sinθ sinφ, cosθ)`.
    pub fn from_bloch(polar: f64, azimuth: f64) -> Self {
        let (s, c) = (polar / 2.0).sin_cos();
        Self::canonical(Complex64::new(c, 0.0), Complex64::from_polar(s, azimuth))
    }

    /// State on the unit sphere in the direction of `v` (which must be non-zero).
    pub fn from_bloch_vector(v: BlochVector) -> Self {
        let n = v.norm();
        let polar = (v.z / n).clamp(-1.0, 1.0).acos();
        let azimuth = v.y.atan2(v.x);
        Self::from_bloch(polar, azimuth)
    }

    pub fn amp0(&self) -> ComplexAmp {
        self.amp0
    }

    pub fn amp1(&self) -> ComplexAmp {
        self.amp1
    }

    pub fn bloch(&self) -> BlochVector {
        let cross = self.amp0.conj() * self.amp1;
        BlochVector {
            x: 2.0 * cross.re,
            y: 2.0 * cross.im,
            z: self.amp0.norm_sqr() - self.amp1.norm_sqr(),
        }
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &PureQubit) -> Complex64 {
        self.amp0.conj() * other.amp0 + self.amp1.conj() * other.amp1
    }

    /// `|⟨self|other⟩|²`, clamped into `[0, 1]`.
    pub fn overlap(&self, other: &PureQubit) -> f64 {
        self.inner(other).norm_sqr().clamp(0.0, 1.0)
    }

    /// The unique (up to phase) state orthogonal to `self`.
    pub fn orthogonal(&self) -> Self {
        Self::canonical(-self.amp1.conj(), self.amp0.conj())
    }

    pub fn apply_pauli(&self, pauli: Pauli) -> Self {
        let (a, b) = pauli.act(self.amp0, self.amp1);
        Self::canonical(a, b)
    }

    /// Same ray within `tol`, judged by `1 − |⟨self|other⟩|²`.
    pub fn same_ray(&self, other: &PureQubit, tol: f64) -> bool {
        1.0 - self.overlap(other) <= tol
    }

    pub fn approx_eq(&self, other: &PureQubit, tol: f64) -> bool {
        (self.amp0 - other.amp0).norm() <= tol && (self.amp1 - other.amp1).norm() <= tol
    }

    /// Renormalizes and fixes the global phase.
    pub(crate) fn canonical(amp0: Complex64, amp1: Complex64) -> Self {
        let norm = (amp0.norm_sqr() + amp1.norm_sqr()).sqrt();
        let (a, b) = (amp0 / norm, amp1 / norm);
        if a.norm() > PHASE_PIVOT {
            let m = a.norm();
            PureQubit {
                amp0: Complex64::new(m, 0.0),
                amp1: b * (a.conj() / m),
            }
        } else {
            let m = b.norm();
            PureQubit {
                amp0: a * (b.conj() / m),
                amp1: Complex64::new(m, 0.0),
            }
        }
    }
}

impl fmt::Display for PureQubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})|0> + ({})|1>", self.amp0, self.amp1)
    }
}

fn check_finite(amps: &[Complex64]) -> Result<(), StateError> {
    if amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
        Ok(())
    } else {
        Err(StateError::NonFinite)
    }
}

/// Real 3-vector `r` with `ρ = ½(1 + r·σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn scaled(&self, k: f64) -> BlochVector {
        BlochVector::new(k * self.x, k * self.y, k * self.z)
    }

    pub fn add(&self, other: &BlochVector) -> BlochVector {
        BlochVector::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    /// Largest componentwise difference.
    pub fn max_abs_diff(&self, other: &BlochVector) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

/// Orthonormal pair defining a two-outcome projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    plus: PureQubit,
    minus: PureQubit,
    label: Cow<'static, str>,
}

impl MeasurementBasis {
    pub fn new(
        plus: PureQubit,
        minus: PureQubit,
        label: impl Into<Cow<'static, str>>,
    ) -> Result<Self, StateError> {
        let inner = plus.inner(&minus).norm();
        if inner > STATE_TOL {
            return Err(StateError::NotOrthogonal(inner));
        }
        Ok(MeasurementBasis {
            plus,
            minus,
            label: label.into(),
        })
    }

    /// Completes `plus` with its orthogonal complement.
    pub fn from_plus(plus: PureQubit, label: impl Into<Cow<'static, str>>) -> Self {
        MeasurementBasis {
            plus,
            minus: plus.orthogonal(),
            label: label.into(),
        }
    }

    /// `Ŝ_z = {|0⟩⟨0|, |1⟩⟨1|}`
    pub fn z() -> Self {
        MeasurementBasis {
            plus: PureQubit::ZERO,
            minus: PureQubit::ONE,
            label: Cow::Borrowed("S_z"),
        }
    }

    /// `Ŝ_x = {|0̄⟩⟨0̄|, |1̄⟩⟨1̄|}`
    pub fn x() -> Self {
        MeasurementBasis {
            plus: PureQubit::ZERO_BAR,
            minus: PureQubit::ONE_BAR,
            label: Cow::Borrowed("S_x"),
        }
    }

    /// `{|0̃⟩⟨0̃|, |1̃⟩⟨1̃|}`, the minimum-error measurement for `|0⟩` vs `|0̄⟩`.
    pub fn optimal() -> Self {
        MeasurementBasis {
            plus: PureQubit::tilde_zero(),
            minus: PureQubit::tilde_one(),
            label: Cow::Borrowed("optimal"),
        }
    }

    /// Basis whose `plus` state sits at the given polar angle in the z-x plane.
    pub fn in_zx_plane(polar: f64) -> Self {
        Self::from_plus(PureQubit::from_bloch(polar, 0.0), format!("zx({polar})"))
    }

    pub fn plus(&self) -> &PureQubit {
        &self.plus
    }

    pub fn minus(&self) -> &PureQubit {
        &self.minus
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn state(&self, outcome: Outcome) -> &PureQubit {
        match outcome {
            Outcome::Plus => &self.plus,
            Outcome::Minus => &self.minus,
        }
    }

    /// Born probability of `outcome` on `s`.
    pub fn probability(&self, s: &PureQubit, outcome: Outcome) -> f64 {
        self.state(outcome).overlap(s)
    }

    /// Samples an outcome with Born probabilities; the state collapses onto
    /// the matching basis vector.
    pub fn measure<R: Rng + ?Sized>(&self, s: &PureQubit, rng: &mut R) -> (Outcome, PureQubit) {
        let outcome = if rng.random::<f64>() < self.plus.overlap(s) {
            Outcome::Plus
        } else {
            Outcome::Minus
        };
        (outcome, *self.state(outcome))
    }
}

/// Finite mixture `{p_i, |i⟩⟨i|}` of pure states.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    entries: Vec<(f64, PureQubit)>,
}

impl Ensemble {
    pub fn new(entries: Vec<(f64, PureQubit)>) -> Result<Self, StateError> {
        if entries.is_empty() {
            return Err(StateError::InvalidEnsemble("no members".into()));
        }
        if let Some((w, _)) = entries.iter().find(|(w, _)| !w.is_finite() || *w < 0.0) {
            return Err(StateError::InvalidEnsemble(format!(
                "weight {w} is not a probability"
            )));
        }
        let total: f64 = entries.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(StateError::InvalidEnsemble(format!(
                "weights sum to {total}"
            )));
        }
        Ok(Ensemble { entries })
    }

    pub fn entries(&self) -> &[(f64, PureQubit)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ p_i r_i`
    pub fn average_bloch(&self) -> BlochVector {
        self.entries
            .iter()
            .fold(BlochVector::ORIGIN, |acc, (w, s)| {
                acc.add(&s.bloch().scaled(*w))
            })
    }
}

/// Free-function form of [`Ensemble::average_bloch`].
pub fn ensemble_average_bloch(e: &Ensemble) -> BlochVector {
    e.average_bloch()
}
