use thiserror::Error;

use crate::shapefn::{DomainError, ParseError};

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad input: malformed expressions, inconsistent system definitions.
    Config,
    /// The numerics failed: singular rays, step underflow, turning points.
    Numerical,
    /// A reduction precondition does not hold for the supplied system.
    Precondition,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("domain error: {0}")]
    Domain(#[from] DomainError),
    #[error("invalid system definition: {0}")]
    InvalidSpec(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("maximum number of steps ({0}) exceeded")]
    MaxSteps(usize),
    #[error("quadrature did not converge on [{a}, {b}] (estimate {estimate:e})")]
    QuadratureNonConvergence { a: f64, b: f64, estimate: f64 },
    #[error("pole detected near {at}")]
    Pole { at: f64 },
    #[error("angular velocity changes sign or vanishes near t = {t}")]
    TurningPoint { t: f64 },
    #[error("root finding failed at theta = {theta}")]
    RootFinding { theta: f64 },
    #[error("reduction precondition violated: {0}")]
    Precondition(String),
    #[error("reduction invalid: L^2 = {l_sq} <= 0 at theta = {theta}")]
    NonPositiveLSquared { theta: f64, l_sq: f64 },
    #[error("symmetry flow left the domain: {0}")]
    FlowEscape(String),
    #[error("image curve is not monotone in theta near theta = {theta}")]
    NotMonotone { theta: f64 },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Parse(_) | Error::InvalidSpec(_) | Error::InvalidInput(_) => ErrorCategory::Config,
            Error::Precondition(_) => ErrorCategory::Precondition,
            _ => ErrorCategory::Numerical,
        }
    }
}
