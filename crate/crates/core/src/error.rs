use thiserror::Error;

/// Errors raised across the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivByZero,
    #[error("square root of a negative number")]
    NegativeRadicand,
    #[error("square root of a quadratic-extension value is not supported here")]
    QuadRadicand,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("element is not a product of vectors")]
    NotVectorProduct,
    #[error("isotropic element has no inverse")]
    NoInverse,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operand has zero radius")]
    ZeroRadiusOperand,
    #[error("cycle is flat (k = 0)")]
    FlatCycle,
    #[error("operand is flat and cannot be k-normalised")]
    FlatOperand,
    #[error("all cycle coefficients are zero")]
    ZeroCycle,
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("metric does not support this operation: {0}")]
    MetricUnsupported(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("node `{0}` is not evaluated")]
    NotEvaluated(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("label `{0}` is reserved for a predefined cycle")]
    ReservedLabel(String),
    #[error("invalid relation: {0}")]
    InvalidRelation(String),
    #[error("node `{label}` would have {count} instances (cap {cap})")]
    BranchOverflow {
        label: String,
        count: usize,
        cap: usize,
    },
    #[error("invalid triple: {0}")]
    InvalidTriple(String),
    #[error("endpoint ordering violated: {0}")]
    InvalidOrdering(String),
    #[error("no real point")]
    NoRealPoint,
    #[error("triples are not aligned")]
    NotAligned,
    #[error("invalid continued fraction: {0}")]
    InvalidCF(String),
    #[error("script error: {0}")]
    Script(String),
}

pub type Result<T> = std::result::Result<T, Error>;
