use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("dimension {dimension} exceeds the limit of {limit}")]
    DimensionOverflow { dimension: usize, limit: usize },

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("truncation overflow: {leaked:.3e} of the norm left the truncated space")]
    TruncationOverflow { leaked: f64 },

    #[error("quadrature did not reach {tolerance:.1e} on [{lower}, {upper}]")]
    QuadratureFailure { lower: f64, upper: f64, tolerance: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal {residual:.3e})")]
    EigenNoConvergence { sweeps: usize, residual: f64 },

    #[error("zero-probability event: {0}")]
    ZeroProbability(String),

    #[error("target state unreachable: {0}")]
    Unreachable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must lie in [0, 1], got {value}"),
        })
    }
}
