use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid size must be even and at least 8, got {0}")]
    InvalidGrid(usize),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("field contains non-finite values")]
    NonFinite,
    #[error("right-hand side has nonzero mean {mean:e} (solvability violated)")]
    NonZeroMeanRhs { mean: f64 },
    #[error("coefficient field is not positive (min {min:e})")]
    CoefficientNotPositive { min: f64 },
    #[error("density bounds [{min}, {max}] violate 1/C1 <= rho <= C1 for C1 = {c1}")]
    AssumptionViolated { min: f64, max: f64, c1: f64 },
    #[error("elliptic solver did not converge in {max_iters} iterations (residual {residual:e})")]
    NoConvergence { max_iters: usize, residual: f64 },
    #[error("velocity field is not divergence free (max |div u| = {divergence:e})")]
    NotDivergenceFree { divergence: f64 },
    #[error("CFL condition violated at t = {t}: dt*max|u|*n/(2 pi) = {cfl}")]
    CflViolation { t: f64, cfl: f64 },
    #[error("Picard iteration stopped contracting at iteration {iteration} (delta {delta:e})")]
    NoContraction { iteration: usize, delta: f64 },
    #[error("need Taylor orders up to {needed}, only {available} available")]
    InsufficientOrders { needed: usize, available: usize },
    #[error("time {t} lies outside the estimated convergence radius {radius}")]
    OutsideRadius { t: f64, radius: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
}
