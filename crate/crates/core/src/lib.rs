//! Desk-scale simulator for a quantum secure direct communication (QSDC)
//! scheme built on EPR pairs.
//!
//! Alice and Bob share EPR pairs; both sides apply Hadamard gates to a
//! random subset of positions; Alice entangles a freshly prepared `|+>`/`|->`
//! particle with her half of each pair (CNOT then Hadamard) and measures,
//! Bob measures his half in the X basis, and the message is reconstructed
//! from the correlation of the two announced outcomes. A random checking
//! subset of pairs is sacrificed to detect eavesdropping before Alice
//! announces anything message-bearing.
//!
//! The crate is organized around four modules:
//!
//! * [`statevec`] — a dense state-vector engine for up to eight qubits with
//!   Hadamard, CNOT, projective Z/X measurement and an exact
//!   outcome-distribution enumerator.
//! * [`protocol`] — the nine-step session state machine: episode planning,
//!   the encoding pipeline, the eavesdropping check and message recovery,
//!   with every classical announcement captured in a [`protocol::Transcript`].
//! * [`adversary`] — Eve's strategies: intercept-resend with a basis policy
//!   and the collective CNOT-ancilla attack.
//! * [`analysis`] — error-rate estimation with confidence intervals,
//!   empirical mutual information, and exact-vs-sampled distribution checks.
//!
//! All randomness is drawn from explicitly seeded streams, so every session
//! and every report is reproducible from its parameters alone.

pub mod adversary;
pub mod analysis;
pub mod error;
pub mod protocol;
pub mod statevec;

pub use adversary::{AttackAction, AttackModel, BasisPolicy, EveRecord};
pub use analysis::{ExactDistribution, SessionStats, SimulationReport};
pub use error::Error;
pub use protocol::{
    Bits, Episode, EpisodeRecord, EpisodeRole, ProtocolParams, SessionResult, Transcript,
    TranscriptEntry,
};
pub use statevec::{Basis, MeasurementOutcome, OutcomeDistribution, QuantumState};
