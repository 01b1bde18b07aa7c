use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("matrix is not Hermitian within tolerance (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("probability table violates its invariants: {0}")]
    InvalidTable(String),

    #[error("POVM elements do not sum to identity (deviation {deviation:.3e})")]
    IncompletePovm { deviation: f64 },

    #[error("Kraus operators are not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("solver did not converge after {iterations} iterations (primal {primal:.3e}, dual {dual:.3e})")]
    Unconverged {
        iterations: usize,
        primal: f64,
        dual: f64,
    },

    #[error("infeasible problem detected: {0}")]
    Infeasible(String),

    #[error("undefined error rate: outcome {outcome} never fires in the {basis} basis")]
    UndefinedErrorRate { outcome: usize, basis: &'static str },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
