use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qubit count {0} is outside the supported range 1..=8")]
    QubitCountOutOfRange(usize),

    #[error("malformed basis-state label {0:?}: expected a bit string matching the qubit count")]
    MalformedLabel(String),

    #[error("qubit index {index} out of range for a {num_qubits}-qubit state")]
    QubitIndexOutOfRange { index: usize, num_qubits: usize },

    #[error("control and target of a CNOT must differ (both are {0})")]
    ControlEqualsTarget(usize),

    #[error("combining states would need {0} qubits, more than the supported 8")]
    QubitBudgetExceeded(usize),

    #[error("qubit {0} appears more than once in a measurement plan")]
    DuplicatePlanQubit(usize),

    #[error("state is not normalized (squared norm {0})")]
    UnnormalizedState(f64),

    #[error("amplitudes must be finite")]
    NonFiniteAmplitude,

    #[error("invalid protocol parameters: {0}")]
    InvalidParams(String),

    #[error("record set is empty")]
    EmptyRecords,

    #[error("sample count {0} is too small (need at least {1})")]
    TooFewSamples(usize, usize),

    #[error("unknown attack kind {0:?}")]
    UnknownAttack(String),
}
