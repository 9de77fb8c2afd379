use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the laboratory.
///
/// Variants are grouped by what went wrong rather than where, so the CLI can
/// map them onto exit codes without inspecting messages.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model specification string could not be parsed.
    #[error("model grammar error: {0}")]
    Grammar(String),

    /// A model was parsed but its parameters are invalid.
    #[error("model error: {0}")]
    Model(String),

    /// The sequence does not numerically belong to the required ideal.
    #[error("membership error: {0}")]
    Membership(String),

    /// The requested computation exceeds the configured budget.
    #[error("cost error: {0}")]
    Cost(String),

    /// A zero singular value reached a route that needs `T^{-1}` on the
    /// orthocomplement of the kernel.
    #[error("kernel convention error: {0}")]
    KernelConvention(String),

    /// The eigenvalue decay hypothesis of the Lidskii formula fails.
    #[error("lidskii hypothesis violated: {0}")]
    Hypothesis(String),

    /// A least-squares fit was singular or a tail fit failed.
    #[error("fit error: {0}")]
    Fit(String),

    /// An eigenvalue sat too close to zero to resolve a crossing.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// A partition is too coarse for the projection-index definition.
    #[error("partition too coarse: {0}")]
    PartitionTooCoarse(String),

    /// Input failed structural validation (Hermitian flags, path type, ...).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
