use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("scale `{name}` must be positive and finite, got {value}")]
    NonPositiveScale { name: &'static str, value: f64 },

    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),

    #[error("|sin(alpha)| = {sin_abs:.3e} is below {eps:e}; the integral kernel is singular at alpha = {alpha}")]
    SingularKernelAngle { alpha: f64, sin_abs: f64, eps: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grids do not match")]
    GridMismatch,

    #[error("kernel phase advances {phase_step:.3} rad between adjacent samples (limit pi); refine the grid")]
    AliasedGrid { phase_step: f64 },

    #[error("truncation size {0} is too small (need at least 2)")]
    SizeTooSmall(usize),

    #[error("normal-ordered series lost precision: largest term {magnitude:e}")]
    SeriesOverflow { magnitude: f64 },

    #[error("operator leaks {leak:.3e} of norm past the truncated space at working dimension {working_dim}")]
    TruncationLeak { leak: f64, working_dim: usize },

    #[error("size mismatch: expected {expected}, got {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("covariance is unphysical: smallest eigenvalue of cov + i*Omega/2 is {min_eigenvalue:e}")]
    UnphysicalState { min_eigenvalue: f64 },

    #[error("convention self-check failed: {0}")]
    ConventionCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
