use thiserror::Error;

/// Errors raised by model construction, kernel evaluation and fitting.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid coefficient sequence: {0}")]
    InvalidCoefficients(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("infinite basis requires cap")]
    InfiniteBasis,
    #[error("noncompact model has no h0")]
    NoncompactHilbert,
    #[error("noncompact model: {0}")]
    Noncompact(&'static str),
    #[error("operation requires the flat model")]
    FlatOnly,
    #[error("series tail bound not reached within degree cap {cap}: achieved bound {achieved:e}")]
    TailBound { cap: usize, achieved: f64 },
    #[error("polynomial is not homogeneous of degree {0}")]
    NotHomogeneous(u32),
    #[error("rank-deficient design: {0}")]
    RankDeficient(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("quadrature did not converge: achieved estimate {estimate:e}, last change {change:e}")]
    Quadrature { estimate: f64, change: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
