use thiserror::Error;

/// Errors raised by the library. Each variant corresponds to one failure
/// class callers are expected to distinguish.
#[derive(Debug, Error)]
pub enum Error {
    /// An input object violates its structural invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation hits a pole (coincident points, point at the origin).
    #[error("singularity: {0}")]
    Singularity(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A linear system is too close to singular to be solved reliably.
    #[error("ill-conditioned: {0}")]
    Conditioning(String),

    /// Ground energy is not separated from the rest of the spectrum.
    #[error("degenerate threshold: {0}")]
    DegenerateThreshold(String),

    /// A root-finding bracket contains no sign change.
    #[error("bracket error: {0}")]
    Bracket(String),

    /// A hypothesis of the underlying result fails for the given input.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// Finite-difference error exceeds the resolution the caller requested.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// A function evaluation produced a non-finite value.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// An iterative method did not reach its tolerance.
    #[error("no convergence: {0}")]
    Convergence(String),

    /// Malformed input file or string.
    #[error("parse error in {source_name}: {message}")]
    Parse { source_name: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(source_name: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            message: message.into(),
        }
    }
}
