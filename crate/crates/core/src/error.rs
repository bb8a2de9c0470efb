use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid density table: {0}")]
    InvalidDensity(String),

    #[error("index component {value} out of range 0..{bound}")]
    IndexOutOfRange { value: usize, bound: usize },

    #[error("exponent sequence exhausted: needed {needed} terms, have {available}")]
    SequenceExhausted { needed: usize, available: usize },

    #[error("exponent 2^{exponent} exceeds the fixed-point phase precision")]
    PrecisionExhausted { exponent: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (residual {residual:e})")]
    Convergence { sweeps: usize, residual: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("counting budget exceeded: {0}")]
    Budget(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("no sign change of the balance function found on a grid of {grid} points")]
    SearchFailure { grid: usize },

    #[error("adaptive quadrature did not converge (estimated error {estimate:e})")]
    Quadrature { estimate: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Budget(_) => 3,
            Error::Config(_)
            | Error::Domain(_)
            | Error::InvalidDensity(_)
            | Error::IndexOutOfRange { .. }
            | Error::SequenceExhausted { .. }
            | Error::PrecisionExhausted { .. }
            | Error::Resolution(_)
            | Error::Shape(_) => 2,
            _ => 1,
        }
    }
}
