use thiserror::Error;

/// Errors raised by the hierarchy computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("n = {n} exceeds the enumeration cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coefficient matrices are not symmetric (entry ({i},{j}))")]
    NotSymmetric { i: usize, j: usize },

    #[error("eigen-solver did not converge (residual {residual:e})")]
    EigenFailure { residual: f64 },

    #[error("least-root cross-check failed: Jacobi {jacobi}, sign-change bisection {bisection}")]
    RootMismatch { jacobi: f64, bisection: f64 },

    #[error("order r = {r} is too small for a polynomial of degree {degree}")]
    OrderTooSmall { r: usize, degree: usize },

    #[error("kernel operator is singular: lambda_{k} = 0")]
    SingularOperator { k: usize },

    #[error("no certificate at this order: LambdaTilde = {lambda_tilde} >= 1")]
    NoCertificate { lambda_tilde: f64 },

    #[error("certification failed: weight {w:e} at y = {y}")]
    CertificationFailed { y: String, w: f64 },

    #[error("SDP solver failed: {0}")]
    Solver(String),

    #[error("LP is {0}")]
    Lp(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
