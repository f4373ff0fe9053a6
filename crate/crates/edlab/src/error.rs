use thiserror::Error;

/// Errors produced by grid construction, state handling, integrators,
/// samplers, and configuration parsing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two >= 64")]
    InvalidGridSize(usize),
    #[error("inverted grid bounds: x_min = {0}, x_max = {1}")]
    InvalidBounds(f64, f64),
    #[error("field length {0} does not match grid size {1}")]
    GridMismatch(usize, usize),
    #[error("density sample {value} at index {index} is negative")]
    NegativeDensity { index: usize, value: f64 },
    #[error("density vanishes everywhere")]
    ZeroDensity,
    #[error("density integral {0} is not within 1e-9 of one")]
    NotNormalized(f64),
    #[error("state norm {0} drifted outside tolerance")]
    NormDrift(f64),
    #[error("boundary leakage: edge density {edge:e} exceeds {limit:e}")]
    BoundaryLeakage { edge: f64, limit: f64 },
    #[error("non-finite value encountered in {0}")]
    NumericAbort(&'static str),
    #[error("identity violation in {what}: deviation {deviation:e}")]
    IdentityViolation { what: &'static str, deviation: f64 },
    #[error("time step {0} must be positive and finite")]
    InvalidTimeStep(f64),
    #[error("CFL violation: max |v| dt/dx = {0:.3} > 0.9; reduce dt")]
    CflViolation(f64),
    #[error("quantum potential phase {0:.3} per step exceeds pi; grid too coarse near a density node")]
    QuantumPotentialOverflow(f64),
    #[error("states are not one step apart: t_a = {0}, t_b = {1}")]
    TimeMismatch(f64, f64),
    #[error("states carry different physical constants")]
    ParamsMismatch,
    #[error("regraduation factor {0} must be positive")]
    InvalidKappa(f64),
    #[error("ensemble needs at least one walker")]
    EmptyEnsemble,
    #[error("sigma = {sigma} is below the grid resolution limit 4 dx = {limit}")]
    SigmaTooNarrow { sigma: f64, limit: f64 },
    #[error("packet width {width:.3} exceeds a tenth of the domain ({limit:.3})")]
    PacketTooWide { width: f64, limit: f64 },
    #[error("invalid physical constants: {0}")]
    InvalidParams(&'static str),
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
