use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("u = {0} is outside the domain u > 0")]
    Domain(f64),

    #[error("energy {h} lies below the center energy {center}")]
    BelowCenter { h: f64, center: f64 },

    #[error("energy {h} is outside the {expected} regime")]
    Regime { h: f64, expected: &'static str },

    #[error("integrand is singular at u = {0} (V'(u) = 0)")]
    SingularIntegrand(f64),

    #[error("invalid forcing bounds p1 = {p1}, p2 = {p2} (need p2 <= p1 < 0)")]
    InvalidBounds { p1: f64, p2: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("finite-difference step {step} is too large near h = {h}")]
    Accuracy { h: f64, step: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("step size underflow at t = {t} (u = {u}, v = {v})")]
    Stiffness { t: f64, u: f64, v: f64 },

    #[error("velocity vanished before reaching u = 0 near t = {t}")]
    NoCollision { t: f64 },

    #[error("launch speed {v} does not exceed the collision guard {gamma}")]
    Guard { v: f64, gamma: f64 },

    #[error("iterate {index} is undefined: speed {v} does not exceed guard {gamma}")]
    IterateUndefined { index: usize, v: f64, gamma: f64 },

    #[error("not found: {0}")]
    NotFound(String),
}

impl Error {
    /// Exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Input(_) | Error::InvalidBounds { .. } => 2,
            Error::Domain(_)
            | Error::BelowCenter { .. }
            | Error::Regime { .. }
            | Error::Guard { .. }
            | Error::IterateUndefined { .. } => 3,
            Error::NotFound(_) => 4,
            Error::SingularIntegrand(_)
            | Error::Accuracy { .. }
            | Error::Numerical(_)
            | Error::Stiffness { .. }
            | Error::NoCollision { .. } => 5,
        }
    }
}
