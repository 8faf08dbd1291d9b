use thiserror::Error;

/// Errors raised by the simulation, factorization and ordering routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("quadrature did not converge on [{lo}, {hi}]: estimate {estimate:e}, error {error:e}")]
    Quadrature {
        lo: f64,
        hi: f64,
        estimate: f64,
        error: f64,
    },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e} < -{threshold:e}")]
    NotPsd { min_eigenvalue: f64, threshold: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical blow-up on path {path} at step {step}: |x| = {norm:e} exceeds cap {cap:e}")]
    NumericalBlowup {
        path: u64,
        step: usize,
        norm: f64,
        cap: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("coupling error: {0}")]
    Coupling(String),

    #[error("empty batch")]
    EmptyBatch,

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Whether the error comes from invalid input rather than from the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Parameter(_)
                | Error::Config(_)
                | Error::Dimension(_)
                | Error::GridMismatch(_)
                | Error::Coupling(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
