use num_complex::Complex64;
use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// Variants fall into three families that the command-line front end maps to
/// distinct exit codes: rejected input, physical infeasibility and numerical
/// non-convergence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("mode does not propagate: omega = {omega} rad/s is at or below the cutoff {omega_cutoff} rad/s")]
    Cutoff { omega: f64, omega_cutoff: f64 },

    #[error("no surface mode: {0}")]
    NoSurfaceMode(String),

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate}, error bound {error_bound:e})")]
    Convergence {
        estimate: Complex64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("root iteration did not converge: {0}")]
    RootNotConverged(String),

    #[error("self-check failed: {0}")]
    SelfCheck(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the CLI: 1 for malformed input, 2 for
    /// physically infeasible requests, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Domain(_) | Error::Io(_) | Error::Json(_) => 1,
            Error::Cutoff { .. } | Error::NoSurfaceMode(_) | Error::Singular(_) => 2,
            Error::Convergence { .. } | Error::RootNotConverged(_) | Error::SelfCheck(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
