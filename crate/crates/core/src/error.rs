use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported algebra dimension {0} (generators must be between 1 and {max})", max = crate::clifford::MAX_GENERATORS)]
    UnsupportedDimension(usize),

    #[error("invalid basis blade {0:?}: indices must be strictly increasing within 1..=n")]
    InvalidBlade(Vec<usize>),

    #[error("evaluation at the origin is undefined")]
    Origin,

    #[error("{what} must be a unit vector (norm {norm})")]
    NotUnit { what: &'static str, norm: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("radius {radius} lies outside the evaluation window [{r_min}, {r_max}]")]
    OutsideWindow { radius: f64, r_min: f64, r_max: f64 },

    #[error("sphere functions live on different quadrature rules")]
    RuleMismatch,

    #[error("quadrature exactness {available} is below the required degree {required}")]
    InsufficientExactness { required: usize, available: usize },

    #[error("inverse heat multiplier exp({log_multiplier}) exceeds the amplification cap exp({cap_log})")]
    AmplificationExceeded { log_multiplier: f64, cap_log: f64 },

    #[error("kernel truncation cannot reach tolerance {tolerance:e} below degree {max_degree}")]
    TruncationUnreachable { tolerance: f64, max_degree: usize },

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Malformed(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
