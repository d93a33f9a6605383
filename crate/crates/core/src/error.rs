use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spin index {index} out of range for a {count}-spin system")]
    SpinIndex { index: usize, count: usize },

    #[error("spin count {0} outside the supported range 1..=12")]
    SpinCount(usize),

    #[error("unknown channel `{0}`")]
    UnknownChannel(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid dimension {0}: operators must be square with a power-of-two size")]
    InvalidDimension(usize),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("invalid spin system: {0}")]
    InvalidSystem(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid state vector: {0}")]
    InvalidState(String),

    #[error("invalid pulse program: {0}")]
    InvalidProgram(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("non-finite objective for ensemble member {member}")]
    NonFinite { member: usize },

    #[error("linear program infeasible: {0}")]
    Infeasible(String),

    #[error("{source_name}:{line}: {msg}")]
    Parse {
        source_name: String,
        line: usize,
        msg: String,
    },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
