use thiserror::Error;

/// Everything that can go wrong while building, analyzing or sampling a model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("root {index} has non-positive imaginary part {im}")]
    NonPositiveImaginaryPart { index: usize, im: f64 },
    #[error("root {re}{im:+}i has no partner -conj within tolerance")]
    UnpairedRoot { re: f64, im: f64 },
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("at least one root is required")]
    NoRoots,
    #[error("distinct roots {a} and {b} are closer than {tol:e}; merge them or separate them")]
    NearDegenerateRoots { a: String, b: String, tol: f64 },
    #[error("derivative order {order} is not two-sided at u = 0 (max {max})")]
    OrderTooHigh { order: usize, max: usize },
    #[error("quadrature did not converge: {0}")]
    NotConverged(String),
    #[error("moment (Gram) matrix is numerically singular")]
    SingularGram,
    #[error("diffusion coefficient squared is not positive: {0}")]
    NonPositiveDiffusion(f64),
    #[error("stationary covariance is not positive definite")]
    NotPositiveDefinite,
    #[error("innovation covariance is indefinite (min eigenvalue {0:e})")]
    FactorizationFailure(f64),
    #[error("explicit Euler step unstable: spectral radius of I + A dt is {0}")]
    UnstableStep(f64),
    #[error("spectral truncation too short: tail variance {tail:e} exceeds {limit:e} for derivative row {row}")]
    TailTooHeavy { row: usize, tail: f64, limit: f64 },
    #[error("moving-average kernel has equal rates; use the confluent form")]
    EqualRates,
    #[error("path too short: effective sample size {0:.1} < 100")]
    PathTooShort(f64),
    #[error("conditioning covariance is singular")]
    DegenerateConditioning,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0}")]
    Io(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonPositiveImaginaryPart { .. } => "NonPositiveImaginaryPart",
            Error::UnpairedRoot { .. } => "UnpairedRoot",
            Error::NonPositiveScale(_) => "NonPositiveScale",
            Error::NoRoots => "NoRoots",
            Error::NearDegenerateRoots { .. } => "NearDegenerateRoots",
            Error::OrderTooHigh { .. } => "OrderTooHigh",
            Error::NotConverged(_) => "NotConverged",
            Error::SingularGram => "SingularGram",
            Error::NonPositiveDiffusion(_) => "NonPositiveDiffusion",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::FactorizationFailure(_) => "FactorizationFailure",
            Error::UnstableStep(_) => "UnstableStep",
            Error::TailTooHeavy { .. } => "TailTooHeavy",
            Error::EqualRates => "EqualRates",
            Error::PathTooShort(_) => "PathTooShort",
            Error::DegenerateConditioning => "DegenerateConditioning",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io(_) => "Io",
            Error::Parse(_) => "Parse",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
