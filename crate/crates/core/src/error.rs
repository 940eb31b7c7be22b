use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("jets expanded at different base points")]
    BaseMismatch,
    #[error("base point has non-finite coordinates")]
    NonFiniteBase,
    #[error("reciprocal of a series with zero constant term")]
    ZeroConstantTerm,
    #[error("root of a series with non-positive constant term")]
    NonPositiveConstantTerm,
    #[error("{0} is not representable in the chosen scalar field")]
    NotRepresentable(&'static str),
    #[error("jet order {available} is below the required order {needed}")]
    InsufficientOrder { needed: usize, available: usize },
    #[error("{what} index {index} out of range (bound {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },
    #[error("singular point: {what} = {value:e} is below the guard")]
    SingularPoint { what: String, value: f64 },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("no admissible sample point found after {0} attempts")]
    NoAdmissiblePoint(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
