use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("stability violated: alpha * mu = {0} must be < 1")]
    Stability(f64),

    #[error("dominating rate violated at t = {time}: intensity {intensity} exceeds bound {bound}")]
    DominatingRate {
        time: f64,
        intensity: f64,
        bound: f64,
    },

    #[error("embedding truncated at t = {time}: intensity {intensity} exceeds z_cap {z_cap}")]
    Truncation {
        time: f64,
        intensity: f64,
        z_cap: f64,
    },

    #[error("test function support ({lo}, {hi}] is not inside window ({start}, {end}]")]
    SupportOutsideWindow {
        lo: f64,
        hi: f64,
        start: f64,
        end: f64,
    },

    #[error("time {t} is outside the simulated window [{start}, {end}]")]
    OutsideWindow { t: f64, start: f64, end: f64 },

    #[error("resolvent horizon {horizon} is too short; need at least {required}")]
    Horizon { horizon: f64, required: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("insufficient samples: got {got}, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("kernel is not square integrable")]
    MissingL2,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
