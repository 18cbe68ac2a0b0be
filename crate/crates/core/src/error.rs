use thiserror::Error;

pub type Result<T> = std::result::Result<T, QncError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QncError {
    #[error("invalid field description: {0}")]
    InvalidField(String),
    #[error("division by zero in finite field")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    FieldMismatch,

    #[error("matrix is singular")]
    SingularMatrix,
    #[error("spanning vectors are linearly dependent")]
    DegenerateSpan,
    #[error("dimension error: {0}")]
    DimensionError(String),

    #[error("restricted symplectic form is degenerate")]
    DegenerateForm,
    #[error("matrix is not symplectic")]
    NotSymplectic,
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("internal error: {0}")]
    InternalError(String),

    #[error("metaplectic synthesis failed: {0}")]
    SynthesisFailed(String),

    #[error("network graph contains a cycle")]
    NotADag,
    #[error("degree error: {0}")]
    DegreeError(String),
    #[error("network has non-Clifford layers")]
    NotClifford,
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("no message capacity: m_** = {m_star_star} >= m0 = {m0}")]
    NoCapacity { m0: usize, m_star_star: usize },
    #[error("invalid rank triple: {0}")]
    InvalidTriple(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("resource limit: joint dimension {dim} exceeds {limit}")]
    ResourceLimit { dim: usize, limit: usize },

    #[error("decoded channel does not factorize (distance {0:e})")]
    ConverseMismatch(f64),
    #[error("node map is not invertible: {0}")]
    NotInvertible(String),
    #[error("kernel is not stochastic: {0}")]
    NotStochastic(String),

    #[error("config error: {0}")]
    Config(String),
}
