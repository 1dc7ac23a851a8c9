use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported ambient dimension {0} (expected 1..=8)")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("bundle rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("multi-index must be strictly increasing: {0:?}")]
    NotStrictlyIncreasing(Vec<usize>),
    #[error("expected a homogeneous form of degree {expected}, got degrees {found:?}")]
    WrongDegree { expected: usize, found: Vec<usize> },
    #[error("operation requires bundle rank 1, got {0}")]
    RankNotOne(usize),
    #[error("zero operator has no Clifford degree")]
    ZeroOperator,
    #[error("operators carry different truncation bounds")]
    IncompatibleTruncation,
    #[error("composition exceeds truncation bound ({what} order {order} > {bound})")]
    TruncationOverflow {
        what: &'static str,
        order: usize,
        bound: usize,
    },
    #[error("holonomy structure failed validation for every sign choice: {0}")]
    ValidationFailed(String),
    #[error("curvature data violates index symmetry: {0}")]
    SymmetryViolation(String),
    #[error("bundle curvature is not skew-Hermitian: {0}")]
    NotSkewHermitian(String),
    #[error("Q matrix has nonzero scalar part")]
    NonNilpotentQ,
    #[error("heat model calibrated for {calibrated}, used with {requested}")]
    CalibrationMismatch {
        calibrated: &'static str,
        requested: &'static str,
    },
    #[error("calibration failed: {0}")]
    CalibrationFailed(String),
    #[error("Duhamel expansion order {0} unsupported (max 2)")]
    UnsupportedOrder(usize),
    #[error("zeta sum diverges for s = {s} (need s > {threshold})")]
    DivergentZeta { s: f64, threshold: f64 },
    #[error("x = {x} beyond enumerated range {limit}")]
    BeyondRange { x: f64, limit: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
