use thiserror::Error;

/// Errors raised by state construction, element application and protocol drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("layout has no subsystems")]
    EmptyLayout,
    #[error("duplicate subsystem {0}")]
    DuplicateSubsystem(String),
    #[error("invalid subsystem {label}: {reason}")]
    InvalidLabel { label: String, reason: String },
    #[error("subsystem {0} not found in layout")]
    SubsystemNotFound(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state space of {size} amplitudes exceeds the limit of {limit}")]
    StateSpaceOverflow { size: usize, limit: usize },
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("matrix is not an isometry (max deviation {0:e})")]
    NotIsometry(f64),
    #[error("projector {0} is not a Hermitian idempotent")]
    InvalidProjector(String),
    #[error("projector set is incomplete (deficiency norm {0:e})")]
    IncompleteProjectors(f64),
    #[error("measurement basis is not orthonormal and complete (deviation {0:e})")]
    InvalidBasis(f64),
    #[error("ensemble weights must be non-negative, got {0}")]
    NegativeWeight(f64),
    #[error("ensemble weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("members do not share a layout")]
    LayoutMismatch,
    #[error("element {element} cannot act on {target}: {reason}")]
    IncompatibleElement {
        element: String,
        target: String,
        reason: String,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("ensemble member outside the supported family: {0}")]
    UnsupportedMember(String),
    #[error("oracle disagreement: {0}")]
    OracleMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
