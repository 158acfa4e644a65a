use thiserror::Error;

/// Errors raised by the relay model, the solvers and the experiment runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scenario parameter violates one of its invariants.
    #[error("invalid system parameter: {0}")]
    InvalidParams(String),

    /// The relay loop gain `(1 - rho) * beta * |f|^2` is not below one, so the
    /// relay output power diverges.
    #[error("oscillatory relay: loop gain {loop_gain} >= 1")]
    Oscillatory { loop_gain: f64 },

    /// Root extraction was asked to solve the zero polynomial.
    #[error("polynomial is identically zero")]
    IdenticallyZero,

    /// A polynomial coefficient was NaN or infinite.
    #[error("non-finite polynomial coefficient")]
    NonFiniteCoefficient,

    /// An interval query was given `lo >= hi`.
    #[error("empty interval ({lo}, {hi})")]
    EmptyInterval { lo: f64, hi: f64 },

    /// An experiment configuration is malformed.
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    /// Reading or writing an experiment artifact failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
