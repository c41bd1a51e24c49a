use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class. The CLI maps these to exit codes and the service to
/// HTTP status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Domain,
    Numeric,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("division by the zero rational function")]
    DivisionByZero,

    #[error("unreduced common root at s = {re} + {im}j; cancel it before evaluating")]
    UnreducedCommonRoot { re: f64, im: f64 },

    #[error("value {re} + {im}j lies in the critical strip (-4, 0)")]
    CriticalStrip { re: f64, im: f64 },

    #[error("h(jw) enters the critical strip (-4, 0) at omega = {omegas:?}")]
    StripViolation { omegas: Vec<f64> },

    #[error("h(s) = c has solutions in the open right half plane for c = {values:?}")]
    StripEncircled { values: Vec<f64> },

    #[error("pole on the imaginary axis at s = {re} + {im}j")]
    ImaginaryAxisPole { re: f64, im: f64 },

    #[error("no feasible (a, omega) pair found for z = {re} + {im}j")]
    Infeasible { re: f64, im: f64 },

    #[error("oracle grid too coarse to resolve z = {re} + {im}j")]
    InsufficientDensity { re: f64, im: f64 },

    #[error("winding number inconclusive: {0}")]
    InconclusiveWinding(String),

    #[error("singular system at omega = {omega}")]
    Singular { omega: f64 },

    #[error("simulation diverged at t = {time} s (|state| = {magnitude:e})")]
    Unstable { time: f64, magnitude: f64 },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Invalid(_) | Error::DivisionByZero | Error::UnreducedCommonRoot { .. } => {
                ErrorKind::Validation
            }
            Error::CriticalStrip { .. }
            | Error::StripViolation { .. }
            | Error::StripEncircled { .. }
            | Error::ImaginaryAxisPole { .. } => ErrorKind::Domain,
            Error::Infeasible { .. }
            | Error::InsufficientDensity { .. }
            | Error::InconclusiveWinding(_)
            | Error::Singular { .. }
            | Error::Unstable { .. } => ErrorKind::Numeric,
        }
    }
}
