use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Variants map onto the CLI exit-code contract: `Argument`, `Interpolation`
/// and `Parse`-like problems are input errors, the rest are numerical.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed arguments: bad grids, empty inputs, zero node counts.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A least-squares problem has no unique solution.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Design matrix too close to rank deficient.
    #[error("ill-conditioned problem: {0}")]
    Conditioning(String),

    /// Target grid extends beyond the support of the data being resampled.
    #[error("interpolation error: {0}")]
    Interpolation(String),

    /// A root or target value cannot be reached inside the search bracket.
    #[error("out of range: {0}")]
    Range(String),

    /// Non-finite intermediate values during a computation.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// The detail text without the category prefix.
    pub fn message(&self) -> &str {
        match self {
            Error::Domain(m)
            | Error::Argument(m)
            | Error::DegenerateFit(m)
            | Error::Conditioning(m)
            | Error::Interpolation(m)
            | Error::Range(m)
            | Error::Numerical(m) => m,
        }
    }

    /// True for errors caused by caller-supplied data rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Argument(_) | Error::Domain(_) | Error::Interpolation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, err: impl FnOnce() -> Error) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(err())
    }
}
