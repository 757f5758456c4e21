use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian: max |A_ij - conj(A_ji)| = {max_deviation:.3e}")]
    NotHermitian { max_deviation: f64 },

    #[error("eigensolver did not converge within {budget} sweeps")]
    NoConvergence { budget: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not a density operator: {reason}")]
    InvalidDensity { reason: String },

    #[error("not a valid POVM: {reason}")]
    InvalidPovm { reason: String },

    #[error("not a valid classical channel: {reason}")]
    InvalidClassicalChannel { reason: String },

    #[error("function undefined at retained eigenvalue {eigenvalue:e}")]
    UndefinedAtEigenvalue { eigenvalue: f64 },

    #[error("second state is rank deficient (min eigenvalue {min_eigenvalue:.3e}); use delta regularization")]
    RankDeficient { min_eigenvalue: f64 },

    #[error("size guard exceeded: {what} (limit {limit})")]
    GuardExceeded { what: String, limit: u64 },

    #[error("unsupported output dimension {dim}: accessible information is only searched for qubits; use the Helstrom or Fuchs-Caves induced channels as lower bounds")]
    UnsupportedDimension { dim: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Error category used for process exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) => ErrorCategory::Parse,
            Error::GuardExceeded { .. } => ErrorCategory::Guard,
            Error::InvariantViolation(_) => ErrorCategory::InvariantAlarm,
            _ => ErrorCategory::Other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Parse,
    Guard,
    InvariantAlarm,
    Other,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Parse => 2,
            ErrorCategory::Guard => 3,
            ErrorCategory::InvariantAlarm => 4,
            ErrorCategory::Other => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
