use std::io;

use crate::exponents::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid construction parameters (grid, config, scenario fields).
    #[error("configuration error: {0}")]
    Config(String),

    /// Non-finite input where finite values are required.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("inadmissible exponents: {}", format_violations(.0))]
    Inadmissible(Vec<Violation>),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("poisson solve did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    PoissonNonConvergence { iterations: usize, residual: f64 },

    #[error("time step {dt:.3e} violates stability limits ({reason}); suggested dt {suggested:.3e}")]
    Cfl {
        dt: f64,
        suggested: f64,
        reason: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("format error: {0}")]
    Format(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Process exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Invalid configuration, scenario or arguments.
pub const EXIT_CONFIG: i32 = 2;
/// A file could not be read or written.
pub const EXIT_IO: i32 = 3;
/// An asserted check or internal invariant failed.
pub const EXIT_ASSERTION: i32 = 4;

impl Error {
    /// Exit status reported by the command-line tool for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Domain(_)
            | Error::Inadmissible(_)
            | Error::Unsupported(_)
            | Error::Cfl { .. }
            | Error::Format(_) => EXIT_CONFIG,
            Error::Io(_) => EXIT_IO,
            Error::Numeric(_) | Error::Contract(_) | Error::PoissonNonConvergence { .. } => {
                EXIT_ASSERTION
            }
        }
    }
}
