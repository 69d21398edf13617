use num_complex::Complex64;
use thiserror::Error;

/// Errors surfaced by the numerical kernels and sweep drivers.
#[derive(Debug, Clone, Error)]
pub enum AdiaError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("shift z = {z} is within tolerance of the spectrum (condition estimate {cond:.3e})")]
    NearSpectrum { z: Complex64, cond: f64 },

    #[error("an eigenvalue lies on or too close to the contour (distance {dist:.3e}, node radius {radius:.3e})")]
    EigenvalueOnContour { dist: f64, radius: f64 },

    #[error("eigensolver failed: {0}")]
    EigFailure(String),

    #[error("integration failed near t = {t_reached}: {reason}")]
    IntegrationFailure { t_reached: f64, reason: String },

    #[error("family does not commute: worst pair (t={t1}, t'={t2}) with commutator norm {norm:.3e}")]
    CommutationViolation { t1: f64, t2: f64, norm: f64 },

    #[error("spectral gap is not uniform over the grid: collapse near t = {t_estimate} (gap {gap:.3e})")]
    NonUniformGap { t_estimate: f64, gap: f64 },

    #[error("resolvent ray hits the spectrum at (t={t}, eps={eps})")]
    InvalidRay { t: f64, eps: f64 },

    #[error("Neumann condition fails at eps = {eps}: sup |T_eps - P| = {defect:.3e} exceeds {bound:.3e}")]
    NeumannCondition { eps: f64, defect: f64, bound: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("rank changed along the grid: {0} -> {1}")]
    RankJump(usize, usize),
}

pub type Result<T> = std::result::Result<T, AdiaError>;
