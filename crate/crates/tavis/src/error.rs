use num_complex::Complex64;
use thiserror::Error;

/// Error type shared by every module in the crate.
///
/// The CLI maps these onto exit codes: configuration problems are caught
/// before any of these are produced, `StepTooLarge` / `NonConvergence` /
/// `IllConditioned` / `SingularResolvent` are numerical failures, and the
/// rest report that a requested operation is outside its validity regime.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid ket string: {0}")]
    InvalidKet(String),

    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error("resolvent is singular at s = {s}")]
    SingularResolvent { s: Complex64 },

    #[error("grid too short: {0}")]
    GridTooShort(String),

    #[error("norm violation: {0}")]
    NormViolation(String),

    #[error("integration step too large: {0}")]
    StepTooLarge(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("requested photon count {requested} exceeds the initial excitation count {available}")]
    ExcitationOverflow { requested: usize, available: usize },

    #[error("ill-conditioned matrix: {0}")]
    IllConditioned(String),
}

pub type Result<T> = std::result::Result<T, Error>;
