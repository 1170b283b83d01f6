use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("CFL violation at step {step} (t = {t:.6e}): dt*max|v|/dr = {courant:.3}")]
    Cfl { step: usize, t: f64, courant: f64 },
    #[error("non-finite state at step {step} (t = {t:.6e}); breakdown suspected")]
    NonFinite { step: usize, t: f64 },
    #[error("mass drift {drift:.3e} at step {step} (t = {t:.6e}) exceeds tolerance")]
    MassDrift { step: usize, t: f64, drift: f64 },
    #[error("tridiagonal solve failed at step {step}")]
    LinearSolve { step: usize },
    #[error("time {t:.6e} outside trajectory window [{start:.6e}, {end:.6e}]")]
    OutOfWindow { t: f64, start: f64, end: f64 },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics themselves (CFL, NaN, drift), as
    /// opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Cfl { .. } | Error::NonFinite { .. } | Error::MassDrift { .. } | Error::LinearSolve { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
