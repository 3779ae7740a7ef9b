use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a prime below 2^62")]
    NotPrime(u64),
    #[error("division by zero in F_p")]
    DivisionByZero,
    #[error("F_{p} has no element of order {order}")]
    NoRootOfUnity { p: u64, order: u64 },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("element order {0} is not prime")]
    OrderNotPrime(u64),
    #[error("operands live in different fields (p = {0} vs {1})")]
    FieldMismatch(u64, u64),
    #[error("zero polynomial has no reciprocal")]
    ZeroPolynomial,
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("degree contract violated: {0}")]
    DegreeContract(String),
    #[error("invalid code parameters: {0}")]
    InvalidCode(String),
    #[error("decoded error does not re-encode to the syndrome (input weight exceeds t = {t})")]
    WeightContractViolated { t: usize },
    #[error("set of size {r} is degenerate in F_{p}")]
    DegenerateSet { r: usize, p: u64 },
    #[error("set of size {r} is not balanced, expected (p-1)/2 = {expected}")]
    NotBalanced { r: usize, expected: usize },
    #[error("budget exceeded for {what}: needs {requested}, limit {limit}")]
    BudgetExceeded { what: String, requested: u128, limit: u128 },
    #[error("two error vectors of weight <= ell share a syndrome")]
    SyndromeCollision,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("weights are not unit norm (norm^2 = {0})")]
    NormViolation(f64),
    #[error("argument outside domain: {0}")]
    DomainError(String),
    #[error("parameters outside the admissible regime: {0}")]
    RegimeViolation(String),
    #[error("invalid instance profile: {0}")]
    InvalidProfile(String),
    #[error("duplicate interpolation node {0}")]
    DuplicateNode(u64),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
