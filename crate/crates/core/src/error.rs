use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} requires at most {limit} qubits, got {n}")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("qubit index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("checks {a} and {b} anticommute")]
    NonCommuting { a: String, b: String },

    #[error("projector chain annihilated every basis state; generators are inconsistent")]
    ProjectionFailed,

    #[error("non-finite amplitude at t = {t}; step size too large")]
    NonFinite { t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("window [{t0}, {t1}] holds fewer than two recorded points")]
    EmptyWindow { t0: f64, t1: f64 },

    #[error("threshold {level} not bracketed: {reason}; widen the delta grid")]
    ThresholdNotBracketed { level: f64, reason: String },

    #[error("fit needs at least two distinct qubit counts, got {0}")]
    InsufficientPoints(usize),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NonHermitian(f64),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
