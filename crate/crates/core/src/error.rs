use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// The system document could not be read as JSON at all.
    #[error("malformed system document: {0}")]
    Malformed(String),

    /// A field of the system document failed validation. `field` is a dotted path.
    #[error("invalid field `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("time {t} outside [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("grid index {index} out of range (last node is {last})")]
    IndexOutOfRange { index: usize, last: usize },

    #[error("backward transition requested: s_idx {s_idx} > t_idx {t_idx}")]
    BackwardTransition { s_idx: usize, t_idx: usize },

    #[error("signal grid does not match the propagator grid")]
    GridMismatch,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("system is not controllable (lambda_min = {lambda_min:e}, lambda_max = {lambda_max:e})")]
    NotControllable { lambda_min: f64, lambda_max: f64 },

    #[error("system is not null controllable: range of U(tau,0) is not contained in range of W_tau")]
    NotNullControllable,

    #[error("linear solve failed (condition estimate {condition:e})")]
    LinearSolve { condition: f64 },

    #[error("spectral parameter {re}{im:+}i outside the required half-plane ({expected})")]
    HalfPlane { re: f64, im: f64, expected: &'static str },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
