use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for {len} elements")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("point set is empty")]
    Empty,

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("coordinate buffer has {got} values, expected {expected} ({n} x {d})")]
    ShapeMismatch {
        n: usize,
        d: usize,
        expected: usize,
        got: usize,
    },

    #[error("non-finite coordinate at point {point}, column {column}")]
    NonFinite { point: usize, column: usize },

    #[error("point set contains duplicate points ({first} and {second}); dedupe first")]
    DuplicatePoints { first: usize, second: usize },

    #[error("zero distance between points {0} and {1}; dedupe the input first")]
    ZeroDistance(usize, usize),

    #[error("edge list leaves {components} disconnected components")]
    Disconnected { components: usize },

    #[error("heights list has {got} entries, tree has {expected} edges")]
    MisalignedHeights { expected: usize, got: usize },

    #[error("invalid dendrogram: {0}")]
    InvalidDendrogram(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("brute-force oracle supports at most {max} points, got {n}")]
    TooManyPoints { n: usize, max: usize },
}
