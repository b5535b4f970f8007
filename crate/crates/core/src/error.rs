use thiserror::Error;

/// Errors raised by the simulation, assembly, decomposition and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QfemError {
    #[error("qubit count {0} outside supported range 1..={max}", max = crate::qsim::MAX_QUBITS)]
    QubitCount(usize),

    #[error("qubit index {index} out of range for a {n}-qubit register")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("register size mismatch: expected {expected} qubits, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("dense unitary extraction limited to {max} qubits, got {n}")]
    TooLargeForDense { n: usize, max: usize },

    #[error("invalid shot configuration: {0}")]
    Shots(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid boundary conditions: {0}")]
    InvalidBoundary(String),

    #[error("invalid forcing: {0}")]
    InvalidForcing(String),

    #[error("matrix is singular or too ill-conditioned (estimated condition {0:e})")]
    Singular(f64),

    #[error("matrix is not symmetric positive definite")]
    NotSpd,

    #[error("generator index out of range: {0}")]
    GeneratorRange(String),

    #[error("unique-element grouping rejected: {0}")]
    Grouping(String),

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("parameter vector has length {actual}, ansatz expects {expected}")]
    ParameterLength { expected: usize, actual: usize },

    #[error("cost denominator {0:e} is not positive; decomposition is broken")]
    BrokenDenominator(f64),

    #[error("solution overlap <f|K|u> = {0:e} is too small to fix the magnitude")]
    VanishingOverlap(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid probability input: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, QfemError>;
