use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },

    #[error("{0} is not a valid prime modulus")]
    InvalidModulus(u64),

    #[error("division by zero")]
    DivisionByZero,

    #[error("variable count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("variable count {n} exceeds the dense-representation cap {cap}")]
    TooManyVariables { n: usize, cap: usize },

    #[error("evaluation point has length {got}, expected {expected}")]
    PointLengthMismatch { expected: usize, got: usize },

    #[error("operands share variable x{0}")]
    OverlappingSupports(usize),

    #[error("model is not syntactic multilinear: {0}")]
    NonMultilinear(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("variable list has odd length {0}")]
    OddLength(usize),

    #[error("invalid block structure: {0}")]
    InvalidBlockStructure(String),

    #[error("no lambda value for pairing {0}")]
    MissingLambda(String),

    #[error("partial derivative matrix side |{side}| = {size} exceeds cap {cap}")]
    RankCapExceeded {
        side: char,
        size: usize,
        cap: usize,
    },

    #[error("partition does not cover the model's variables: {0}")]
    InvalidPartition(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
