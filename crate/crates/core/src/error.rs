use thiserror::Error;

/// Errors raised by the compute modules.
///
/// Variants whose name is returned by [`QpseError::guard_name`] are numerical
/// guards: the input was well formed but the grid cannot represent the state
/// to the required accuracy.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpseError {
    #[error("ZeroNorm: state has numerically zero mass ({mass:e})")]
    ZeroNorm { mass: f64 },

    #[error("NotNormalized: mass residual {residual:e} exceeds {tolerance:e}")]
    NotNormalized { residual: f64, tolerance: f64 },

    #[error("NonFinite: {0}")]
    NonFinite(String),

    #[error("GridMismatch: {0}")]
    GridMismatch(String),

    #[error("InvalidGrid: {0}")]
    InvalidGrid(String),

    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),

    #[error("GridTooSmall: {0}")]
    GridTooSmall(String),

    #[error("AliasedMomentum: {0}")]
    AliasedMomentum(String),

    #[error("IllConditioned: {0}")]
    IllConditioned(String),

    #[error("EdgeMassExceeded: wraparound mass {mass:e} at t = {time} exceeds {limit:e}")]
    EdgeMassExceeded { time: f64, mass: f64, limit: f64 },

    #[error("UnsupportedSpin: s = {0} (only s = 0 and s = 1/2 are supported)")]
    UnsupportedSpin(String),
}

impl QpseError {
    /// Name of the numerical guard that tripped, if this is a guard error.
    pub fn guard_name(&self) -> Option<&'static str> {
        match self {
            QpseError::GridTooSmall(_) => Some("GridTooSmall"),
            QpseError::AliasedMomentum(_) => Some("AliasedMomentum"),
            QpseError::EdgeMassExceeded { .. } => Some("EdgeMassExceeded"),
            QpseError::IllConditioned(_) => Some("IllConditioned"),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, QpseError>;
