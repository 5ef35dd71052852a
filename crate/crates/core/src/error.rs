use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {0} outside supported range 1..={max}", max = crate::linalg::MAX_DIM)]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("exp overflow")]
    ExpOverflow,

    #[error("not a group: {0}")]
    NotAGroup(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// A representation (orbit or mixing) violates one of its invariants.
    #[error("invalid representation [{invariant}]: {detail}")]
    InvalidRepresentation {
        invariant: &'static str,
        detail: String,
    },

    #[error("tail bound unavailable: {0}")]
    TailBoundUnavailable(String),

    #[error("divergent: {0}")]
    Divergent(String),

    #[error("not symmetries: {0}")]
    NotSymmetries(String),

    #[error("restriction invalid: {0}")]
    RestrictionInvalid(String),

    #[error("fixed space violated: {0}")]
    FixedSpaceViolated(String),

    #[error("singular: {0}")]
    Singular(String),

    #[error("wrong mode: {0}")]
    WrongMode(String),

    #[error("not quasi-decomposable: {0}")]
    NotQuasiDecomposable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
