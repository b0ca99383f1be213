/// Errors shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scaled rate or other numeric argument is out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A sample configuration violates its structural invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The request is beyond a configured resource limit (state budget,
    /// canonicalization size, enumeration budget).
    #[error("capability exceeded: {0}")]
    Capability(String),

    /// A verification run found a disagreement between routes.
    #[error("verification failed: {0}")]
    Verification(String),

    /// Internal numerical invariant broken (e.g. a singular degree system,
    /// which diagonal dominance rules out for valid parameters).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
