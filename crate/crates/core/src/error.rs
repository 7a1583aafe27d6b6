use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("group needs at least one factor")]
    EmptyFactorList,
    #[error("group factor {index} is zero")]
    ZeroFactor { index: usize },
    #[error("group order exceeds the configured cap of {cap}")]
    OrderOverflow { cap: u64 },
    #[error("cannot parse group literal {literal:?}: {reason}")]
    GroupLiteral { literal: String, reason: String },
    #[error("element has {got} coordinates, group has {expected} factors")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {coord} is out of range for factor Z{modulus}")]
    CoordinateOutOfRange { coord: u64, modulus: u64 },
    #[error("operands live in different groups ({left} vs {right})")]
    GroupMismatch { left: String, right: String },
    #[error("density {0} is outside [0, 1]")]
    DensityOutOfRange(String),
    #[error("cannot parse rational {0:?}")]
    RationalParse(String),
    #[error("{0} must be non-empty")]
    EmptySet(&'static str),
    #[error("transform of length {len} exceeds the supported maximum 2^32")]
    TransformOverflow { len: u128 },
    #[error("grid of {cells} cells exceeds the configured cap of {cap}")]
    ResolutionOverflow { cells: u128, cap: u64 },
    #[error("invalid constructible set: {0}")]
    InvalidConstructible(String),
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("exhaustive Petridis selection needs |A| <= {cap}, got {size}")]
    PetridisCapExceeded { size: usize, cap: usize },
    #[error("no verified Petridis certificate found among {candidates} local minima")]
    CertificateUnverified { candidates: usize },
    #[error("invalid quotient: {0}")]
    InvalidQuotient(String),
    #[error("search space of {pairs} pairs exceeds the budget of {budget}")]
    BudgetExceeded { pairs: u128, budget: u128 },
    #[error("{0} is not supported here")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("resolution schedule exhausted at n = {best_n} without meeting the epsilon condition")]
    ScheduleExhausted { best_n: u64 },
    #[error("{0} has zero measure")]
    ZeroMeasure(&'static str),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}
