use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed Pauli word {text:?}: {reason}")]
    MalformedPauli { text: String, reason: String },

    #[error("site {site} out of range for a {n}-qubit register")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("site {0} listed more than once")]
    DuplicateSite(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("register of {0} qubits exceeds the dense-matrix limit of {max}", max = crate::MAX_QUBITS)]
    RegisterTooLarge(usize),

    #[error("register size must be at least 1")]
    EmptyRegister,

    #[error("basis index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("expectation value has imaginary residue {0:.3e}")]
    ImaginaryResidue(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration unstable: {0}")]
    Integration(String),

    #[error("unknown name {0:?}")]
    UnknownName(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("code population {0:.3e} too small to condition on")]
    VanishingPopulation(f64),

    #[error("state preparation failed verification: {0}")]
    Verification(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("fit did not converge: {0}")]
    NonConvergence(String),

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
