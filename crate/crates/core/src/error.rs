use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e} > tol {tol:.3e})")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("result dimension {dim} exceeds the cap of {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("distributions have different ranges: {left} vs {right}")]
    RangeMismatch { left: usize, right: usize },

    #[error("event probability {prob:.3e} is below the floor {floor:.3e}")]
    ZeroProbabilityEvent { prob: f64, floor: f64 },

    #[error("invalid Renyi order alpha = {alpha}")]
    InvalidAlpha { alpha: f64 },

    #[error("invalid smoothing parameter epsilon = {epsilon} (need 0 <= epsilon < 1)")]
    InvalidEpsilon { epsilon: f64 },

    #[error("{what} ({size}) exceeds the supported cap ({cap})")]
    TooLarge {
        what: &'static str,
        size: u64,
        cap: u64,
    },

    #[error("seed space of {bits} bits exceeds the enumeration cap of {cap} bits")]
    SeedSpaceTooLarge { bits: u64, cap: u64 },

    #[error("bit-string length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
