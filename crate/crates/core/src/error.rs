//! Error type shared by all modules.

use alloc::string::String;

/// Errors reported by the analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A matrix or vector contains NaN or infinite entries.
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    /// Ambient or matrix dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A matrix required to be symmetric is not, beyond tolerance.
    #[error("matrix not symmetric: asymmetry residual {residual:e}")]
    NotSymmetric { residual: f64 },

    /// A matrix required to be positive semidefinite has a significantly
    /// negative eigenvalue.
    #[error("matrix not positive semidefinite: min eigenvalue {min_eig:e}")]
    NotPsd { min_eig: f64 },

    /// The Lyapunov matrix is not symmetric positive definite.
    #[error("Lyapunov matrix not positive definite: min eigenvalue {min_eig:e}")]
    NotPositiveDefinite { min_eig: f64 },

    /// `Bᵀ + B ⪯ 0` fails for the given mode.
    #[error("common Lyapunov condition violated at mode {index}: max eigenvalue {max_eig:e}")]
    LyapunovViolated { index: usize, max_eig: f64 },

    /// A time beyond the horizon of an inextensible signal was requested.
    #[error("time {t} beyond signal horizon {horizon}")]
    OutOfRange { t: f64, horizon: f64 },

    /// A check was invoked on a system it does not apply to.
    #[error("not applicable: {0}")]
    NotApplicable(&'static str),

    /// Any other precondition violation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
