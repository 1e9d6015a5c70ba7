use thiserror::Error;

use crate::qsim::Owner;

/// Errors raised anywhere in the simulation stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("duplicate register name `{0}`")]
    DuplicateRegister(String),

    #[error("register `{name}` has dimension {dim}; registers need dimension >= 2")]
    BadRegisterDim { name: String, dim: usize },

    #[error("state space of {dim} amplitudes exceeds the dimension cap {cap}")]
    CapExceeded { dim: u128, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("layouts differ: {0}")]
    LayoutMismatch(String),

    #[error("value {value} out of range for register `{name}` (dim {dim})")]
    ValueOutOfRange { name: String, value: usize, dim: usize },

    #[error("gate would change pinned register `{0}`")]
    PinnedRegisterModified(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("smoothing parameter {0} is outside [0, 1)")]
    BadEpsilon(f64),

    #[error("invalid function table: {0}")]
    InvalidTable(String),

    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("round {round}: {actor:?} touches register `{register}` owned by {owner:?}")]
    UnownedRegister {
        round: usize,
        actor: Owner,
        register: String,
        owner: Owner,
    },

    #[error("round {round}: cannot move `{register}`: {reason}")]
    BadMove {
        round: usize,
        register: String,
        reason: String,
    },

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("protocol is not exact: worst-case failure {failure:.3e}")]
    NotExact { failure: f64 },

    #[error("measured failure {measured:.6e} exceeds declared error {declared:.6e}")]
    FailureExceedsDeclared { measured: f64, declared: f64 },

    #[error("repetition count {0} must be odd")]
    EvenRepetitions(usize),

    #[error("invalid query algorithm: {0}")]
    InvalidAlgorithm(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
