use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("resistance weight r[{index}] = {value} is outside (0, 1)")]
    WeightOutOfRange { index: usize, value: f64 },
    #[error("dimension root-finding did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("letter {letter} is outside the alphabet 1..={alphabet}")]
    InvalidLetter { letter: usize, alphabet: usize },
    #[error("vertex address {0} is not realizable")]
    UnrealizableAddress(String),
    #[error("gluing inconsistency: {0}")]
    GluingInconsistency(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("requested {requested} eigenpairs but only {available} are available")]
    TooManyEigenpairs { requested: usize, available: usize },
    #[error("diagnostic needs at least {needed} eigenvalues, basis has {available}")]
    BasisTooSmall { needed: usize, available: usize },
    #[error("time grid must start at a nonnegative time and be strictly increasing")]
    NonMonotoneGrid,
    #[error("sigma_ab diverges for a = {a}, b = {b} (both nonnegative)")]
    DivergentSum { a: f64, b: f64 },
    #[error("wrong boundary condition: {0}")]
    WrongBoundaryCondition(String),
    #[error("degenerate regression: {0}")]
    DegenerateFit(String),
    #[error("too few replicas: {got} < {needed}")]
    TooFewReplicas { got: usize, needed: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
