use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("extension degree {0} unsupported (1 ≤ t ≤ 4)")]
    UnsupportedDegree(u32),
    #[error("field order {0} exceeds the supported maximum of 65535")]
    FieldTooLarge(u64),
    #[error("invalid modulus polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("polynomial {0:?} is reducible over Z_{1}")]
    ReduciblePolynomial(Vec<u32>, u32),
    #[error("field element index {index} out of range for field of order {order}")]
    IndexOutOfRange { index: u64, order: u32 },
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("array would have {rows} rows, over the budget of {budget}")]
    RowBudgetExceeded { rows: u128, budget: usize },
    #[error("invalid orthogonal array: {0}")]
    InvalidArray(String),
    #[error("array fails the {0} check at the requested strength")]
    ArrayCheckFailed(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid site subset: {0}")]
    InvalidSubset(String),
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no parameter tuple satisfies the constraints for d = {d}, n = {n}")]
    NoValidParams { d: u32, n: usize },
    #[error("(N={n}, d={d}, k={k}) is not covered by any implemented construction: {reason}")]
    NotCovered {
        n: usize,
        d: u32,
        k: usize,
        reason: String,
    },

    #[error("state is not normalized (norm² = {0})")]
    Unnormalized(f64),
    #[error("strength {k} out of range for {n} sites (1 ≤ k ≤ ⌊n/2⌋)")]
    StrengthOutOfRange { k: usize, n: usize },

    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
