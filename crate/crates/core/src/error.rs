use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size {0}: need an even n >= 4")]
    InvalidGrid(usize),
    #[error("grid mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),
    #[error("field is not mean-zero (mean {mean:e}, max {max:e})")]
    NotMeanZero { mean: f64, max: f64 },
    #[error("under-resolved kernel: {what} = {scale:e} needs at least {min:e}")]
    UnderResolved { what: &'static str, scale: f64, min: f64 },
    #[error("radius {0:e} exceeds pi")]
    RadiusTooLarge(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("time step fell below dt_min = {0:e} at t = {1}")]
    StepTooSmall(f64, f64),
    #[error("non-finite state at t = {t} (step {step})")]
    NonFinite { t: f64, step: usize },
    #[error("beta not in K: {0}")]
    BetaNotAdmissible(String),
    #[error("out of validity range: {0}")]
    OutOfRange(String),
    #[error("empty time window [{0}, {1}]")]
    EmptyWindow(f64, f64),
    #[error("inconsistent decomposition: {0}")]
    InconsistentSplit(String),
    #[error("snapshot format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
