use thiserror::Error;

/// Errors raised by the simulation kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("no ansatz solution: {0}")]
    NoSolution(String),

    #[error("degenerate state: both amplitudes are zero")]
    DegenerateState,

    #[error("grid too narrow: {mass:.3e} of the probability lies outside [{x_min}, {x_max}]")]
    GridTooNarrow { mass: f64, x_min: f64, x_max: f64 },

    #[error("eigenvalues not converged in grid spacing: E0 changed by {change:.3e} on refinement (tolerance {tolerance:.1e})")]
    Resolution { change: f64, tolerance: f64 },

    #[error("probability density {density:.3e} reached the grid edge at t = {time}")]
    EdgeLeakage { density: f64, time: f64 },

    #[error("replay drive sampled at t = {t} outside its recorded span [{start}, {end}]")]
    DriveOutOfRange { t: f64, start: f64, end: f64 },

    #[error("trajectory escaped the physical region at t = {t} (x = {x})")]
    UnstableIntegration { t: f64, x: f64 },

    #[error("section period {period} must exceed ten sample intervals ({interval})")]
    PeriodMismatch { period: f64, interval: f64 },

    #[error("series is not uniformly sampled (sample {index})")]
    NonuniformSampling { index: usize },

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
