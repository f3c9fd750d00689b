use thiserror::Error;

/// Errors raised by model construction, the eigensolvers and the statistics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter failed validation. `field` names the offending input.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("site index {index} outside 1..={size}")]
    SiteOutOfRange { index: usize, size: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// The phase at `theta_lo`/`theta_hi` does not straddle `k*pi`.
    #[error("bracket ({theta_lo}, {theta_hi}) does not straddle multiple {k} of pi")]
    Bracketing { k: i64, theta_lo: f64, theta_hi: f64 },

    /// `sin y_{L+1}(theta)` vanishes to tolerance; the count is tie-broken.
    #[error("theta = {theta} sits on an eigenphase (|sin y| = {residual:e})")]
    BoundaryAmbiguous { theta: f64, residual: f64 },

    /// The energy is closer to an eigenvalue than the requested tolerance.
    #[error("energy {energy} within {distance:e} of the spectrum")]
    NearSpectrum { energy: f64, distance: f64 },

    /// The theta window `(lo, hi)` leaves `(0, pi)` or the Lipschitz neighbourhood.
    #[error("window ({lo}, {hi}) collides with the spectral edge: {reason}")]
    SpectralEdge { lo: f64, hi: f64, reason: String },

    /// The two eigensolvers disagree on a window.
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
