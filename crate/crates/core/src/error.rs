//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// State with (numerically) zero norm where a normalizable state is required.
    #[error("degenerate state: {0}")]
    DegenerateState(String),

    /// Position grid too coarse for the fastest momentum component.
    #[error("resolution error: dx * |k|_max = {dx_kmax:.6} must be < pi")]
    Resolution { dx_kmax: f64 },

    /// A grid does not cover the support it must cover.
    #[error("grid coverage error: {0}")]
    GridCoverage(String),

    /// Operation needs support on k > 0 but found weight elsewhere.
    #[error("domain error: {0}")]
    Domain(String),

    /// A density that should integrate to one does not.
    #[error("normalization error: integral = {integral:.9e}, expected 1 within {tol:.1e}")]
    Normalization { integral: f64, tol: f64 },

    /// Trajectory stepped into a region of vanishing probability density.
    #[error("node proximity: density {density:.3e} below floor {floor:.3e} at x = {x:.6}, t = {t:.6}")]
    NodeProximity { x: f64, t: f64, density: f64, floor: f64 },

    /// Too many trajectory steps failed; the ensemble result is not trustworthy.
    #[error("scenario rejected: {0}")]
    ScenarioRejected(String),

    /// The Theorem-4 pair could not be built from the available states.
    #[error("construction error: {0}")]
    Construction(String),

    /// Superposition scan with no signal to fit.
    #[error("degenerate scan: {0}")]
    DegenerateScan(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
