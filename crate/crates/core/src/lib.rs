//! Simulation and analysis of a two-party coin-tossing game played with
//! nonorthogonal qubit states.
//!
//! Alice sends `|0⟩` or `|0̄⟩`; Bob either guesses which one from an optimal
//! measurement or secretly keeps the qubit and checks whatever Alice later
//! claims. Catching a false claim costs her a large penalty `R`.
//!
//! - [`qubit`]: single- and two-qubit pure states and projective measurements.
//! - [`protocol`]: round execution, settlement, noise and aborting.
//! - [`strategy`]: honest and cheating players.
//! - [`analysis`]: closed forms, exact enumeration and Monte Carlo estimates.

pub mod analysis;
pub mod protocol;
pub mod qubit;
pub mod strategy;

pub use protocol::{ProtocolParams, RoundRecord, SessionStats, StateLabel};
pub use qubit::{MeasurementBasis, PureQubit, TwoQubitPure};
