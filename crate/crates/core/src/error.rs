use thiserror::Error;

use crate::gate::QubitId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gate {0} has no inverse")]
    NonInvertibleGate(String),
    #[error("qubit {0} appears more than once in a command")]
    DuplicateQubit(QubitId),
    #[error("gate {gate} expects {expected} target(s), got {got}")]
    ArityMismatch { gate: String, expected: usize, got: usize },
    #[error("gate {0} cannot carry controls")]
    ControlledNonUnitary(String),
    #[error("invalid gate parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix of width {0} exceeds the supported maximum")]
    TooWide(usize),
    #[error("composite gate {0} has no matrix")]
    CompositeHasNoMatrix(String),
    #[error("unknown composite gate {0}")]
    UnknownComposite(String),

    #[error("qubit {0} is not live")]
    DeadQubitUse(QubitId),
    #[error("measurement inside a compute section")]
    NonInvertibleInCompute,
    #[error("compute section was already uncomputed")]
    DoubleUncompute,
    #[error("control qubit {0} is also used by a command inside the control context")]
    ControlTargetsOverlap(QubitId),
    #[error("empty control context")]
    EmptyControls,
    #[error("loop count must be at least 1")]
    InvalidLoopCount,
    #[error("qubit allocation inside a backend-supported loop")]
    AllocateInLoop,

    #[error("no decomposition rule for {0}")]
    NoRuleApplicable(String),

    #[error("constant {c} out of range for modulus {modulus}")]
    ConstantOutOfRange { c: u64, modulus: u64 },
    #[error("{a} is not coprime to {modulus}")]
    NotCoprime { a: u64, modulus: u64 },
    #[error("invalid modulus {0}: must be an odd composite >= 9")]
    InvalidN(u64),

    #[error("bipartite graph is not regular")]
    NotRegular,
    #[error("{qubits} qubits do not fit on a hardware graph with {positions} positions")]
    CircuitTooWide { qubits: usize, positions: usize },
    #[error("{0} qubits cannot be embedded on the grid")]
    TooManyQubits(usize),
    #[error("not a permutation: {0}")]
    InvalidPermutation(String),
    #[error("mapper cannot route {0}; lower to one- and two-qubit gates first")]
    UnmappableCommand(String),

    #[error("cannot simulate {0}")]
    UnsimulableGate(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    ParseError {
        line: usize,
        column: usize,
        message: String,
    },
}
