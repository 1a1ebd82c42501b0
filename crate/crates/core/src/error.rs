use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A tiling or height function violates its structural invariants.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// Boundary data admits no complete height function.
    #[error("infeasible boundary data: violated constraint cycle through {cycle:?}")]
    Infeasible { cycle: Vec<(i32, i32)> },

    /// A configured resource cap (region size, enumeration count) was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// An iterative numerical method failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Malformed text input.
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
