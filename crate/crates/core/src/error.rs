use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point coincides with the centre of a circular mirror.
    #[error("singular input: {0}")]
    Singular(String),

    #[error("integer overflow in exact arithmetic: {0}")]
    Overflow(&'static str),

    #[error("invalid root quadruple {root:?}: {reason}")]
    InvalidRoot { root: [i64; 4], reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("mesh generation failed: {0}")]
    Mesh(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
}
