use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use super::{
    check_finite, BlochVector, ComplexAmp, MeasurementBasis, Outcome, Pauli, PureQubit, StateError,
    STATE_TOL,
};

/// One half of a two-qubit register. `A` stays with Alice, `B` travels to Bob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

impl Subsystem {
    pub fn other(self) -> Subsystem {
        match self {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subsystem::A => "A",
            Subsystem::B => "B",
        })
    }
}

/// Normalized joint state, amplitudes ordered `|00⟩, |01⟩, |10⟩, |11⟩` with
/// Alice's qubit first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitPure {
    amps: [Complex64; 4],
}

#[inline]
fn idx(a: usize, b: usize) -> usize {
    2 * a + b
}

impl TwoQubitPure {
    pub fn new(amps: [ComplexAmp; 4]) -> Result<Self, StateError> {
        check_finite(&amps)?;
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > STATE_TOL {
            return Err(StateError::NotNormalized(norm_sq));
        }
        Ok(TwoQubitPure { amps })
    }

    pub fn from_unnormalized(amps: [ComplexAmp; 4]) -> Result<Self, StateError> {
        check_finite(&amps)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(StateError::ZeroVector);
        }
        Ok(TwoQubitPure {
            amps: amps.map(|a| a / norm),
        })
    }

    /// `|a⟩_A ⊗ |b⟩_B`
    pub fn product(a: &PureQubit, b: &PureQubit) -> Self {
        let (a, b) = ([a.amp0(), a.amp1()], [b.amp0(), b.amp1()]);
        TwoQubitPure {
            amps: [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]],
        }
    }

    /// `(|0⟩_A|b0⟩_B + |1⟩_A|b1⟩_B)/√2`, normalized.
    pub fn correlated(b0: &PureQubit, b1: &PureQubit) -> Self {
        let amps = [b0.amp0(), b0.amp1(), b1.amp0(), b1.amp1()];
        Self::from_unnormalized(amps).expect("unit vectors give a non-zero sum")
    }

    pub fn amps(&self) -> &[ComplexAmp; 4] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn amp(&self, which: Subsystem, own: usize, other: usize) -> Complex64 {
        match which {
            Subsystem::A => self.amps[idx(own, other)],
            Subsystem::B => self.amps[idx(other, own)],
        }
    }

    /// Applies a Pauli operator to one subsystem.
    pub fn apply_pauli(&self, which: Subsystem, pauli: Pauli) -> Self {
        let mut out = self.amps;
        for other in 0..2 {
            let (a0, a1) = pauli.act(self.amp(which, 0, other), self.amp(which, 1, other));
            match which {
                Subsystem::A => {
                    out[idx(0, other)] = a0;
                    out[idx(1, other)] = a1;
                }
                Subsystem::B => {
                    out[idx(other, 0)] = a0;
                    out[idx(other, 1)] = a1;
                }
            }
        }
        TwoQubitPure { amps: out }
    }

    /// Contracts `which` with `⟨v|`, leaving the unnormalized state of the
    /// other subsystem. Its squared norm is the projection probability.
    fn contract(&self, which: Subsystem, v: &PureQubit) -> [Complex64; 2] {
        let bra = [v.amp0().conj(), v.amp1().conj()];
        let mut rest = [Complex64::new(0.0, 0.0); 2];
        for (other, slot) in rest.iter_mut().enumerate() {
            *slot = bra[0] * self.amp(which, 0, other) + bra[1] * self.amp(which, 1, other);
        }
        rest
    }

    /// Probability that measuring `which` in `basis` yields `outcome`.
    pub fn marginal_probability(
        &self,
        which: Subsystem,
        basis: &MeasurementBasis,
        outcome: Outcome,
    ) -> f64 {
        let rest = self.contract(which, basis.state(outcome));
        (rest[0].norm_sqr() + rest[1].norm_sqr()).clamp(0.0, 1.0)
    }

    /// Projects `which` onto the `outcome` vector of `basis`. Returns the
    /// branch probability and, when it is non-zero, the collapsed state of
    /// the other subsystem.
    pub fn project(
        &self,
        which: Subsystem,
        basis: &MeasurementBasis,
        outcome: Outcome,
    ) -> (f64, Option<PureQubit>) {
        let rest = self.contract(which, basis.state(outcome));
        let prob = (rest[0].norm_sqr() + rest[1].norm_sqr()).clamp(0.0, 1.0);
        let remaining = PureQubit::from_unnormalized(rest[0], rest[1]).ok();
        (prob, remaining.filter(|_| prob > 0.0))
    }

    /// Measures one subsystem with Born sampling and returns the outcome
    /// together with the normalized collapsed state of the other subsystem.
    pub fn measure_subsystem<R: Rng + ?Sized>(
        &self,
        which: Subsystem,
        basis: &MeasurementBasis,
        rng: &mut R,
    ) -> (Outcome, PureQubit) {
        let plus = self.contract(which, basis.plus());
        let p_plus = plus[0].norm_sqr() + plus[1].norm_sqr();
        let (outcome, rest) = if rng.random::<f64>() < p_plus {
            (Outcome::Plus, plus)
        } else {
            (Outcome::Minus, self.contract(which, basis.minus()))
        };
        let remaining = PureQubit::from_unnormalized(rest[0], rest[1])
            .expect("a sampled branch has non-zero amplitude");
        (outcome, remaining)
    }

    /// Probability of the joint outcome `(outcome_a, outcome_b)` when each
    /// party measures its own qubit.
    pub fn joint_probability(
        &self,
        basis_a: &MeasurementBasis,
        outcome_a: Outcome,
        basis_b: &MeasurementBasis,
        outcome_b: Outcome,
    ) -> f64 {
        let va = basis_a.state(outcome_a);
        let vb = basis_b.state(outcome_b);
        let (ea, eb) = ([va.amp0(), va.amp1()], [vb.amp0(), vb.amp1()]);
        let mut amp = Complex64::new(0.0, 0.0);
        for (a, ca) in ea.iter().enumerate() {
            for (b, cb) in eb.iter().enumerate() {
                amp += ca.conj() * cb.conj() * self.amps[idx(a, b)];
            }
        }
        amp.norm_sqr().clamp(0.0, 1.0)
    }

    /// Bloch vector of the partial trace over the other subsystem.
    pub fn reduced_bloch(&self, which: Subsystem) -> BlochVector {
        // ρ[i][j] = Σ_k amp(i,k) conj(amp(j,k))
        let rho = |i: usize, j: usize| -> Complex64 {
            (0..2)
                .map(|k| self.amp(which, i, k) * self.amp(which, j, k).conj())
                .sum()
        };
        let off = rho(0, 1);
        BlochVector {
            x: 2.0 * off.re,
            y: -2.0 * off.im,
            z: rho(0, 0).re - rho(1, 1).re,
        }
    }
}
