use thiserror::Error;

/// Errors raised by optlab operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("table coefficients are defined for k >= 1, got k = 0")]
    ZeroStepIndex,

    #[error("singular preconditioner at step {step}, coordinate {coord}: zero diagonal with nonzero update")]
    SingularPreconditioner { step: usize, coord: usize },

    #[error("no {framework} default exists for {method}")]
    UnsupportedPreset { framework: String, method: String },

    #[error("synthetic draw rejected {0} times (label sum never positive)")]
    RejectionCap(usize),

    #[error("sign condition failed: {0}")]
    SignCondition(String),

    #[error("kernel matrix XX^T is singular")]
    SingularKernel,

    #[error("empty input")]
    EmptyInput,

    #[error("margin undefined for the zero vector")]
    ZeroVector,

    #[error("trajectory must start at w0 = 0")]
    NonzeroStart,

    #[error("step size {0} is not in the grid")]
    NotInGrid(f64),

    #[error("every trial diverged on grid {0:?}")]
    AllDiverged(Vec<f64>),

    #[error("unknown {kind}: {value}")]
    Unknown { kind: &'static str, value: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Broad category, used by the CLI to choose an exit code.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Io(_) | Error::Json(_) => ErrorCategory::Io,
            Error::SingularPreconditioner { .. }
            | Error::SingularKernel
            | Error::AllDiverged(_)
            | Error::RejectionCap(_) => ErrorCategory::Numerical,
            _ => ErrorCategory::Usage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Numerical,
    Io,
}

pub type Result<T> = std::result::Result<T, Error>;
