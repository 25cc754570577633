use thiserror::Error;

/// Errors produced by the analysis, solver and simulation routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exact integer arithmetic would have wrapped.
    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    /// An exhaustive search was refused because its space exceeds the guard.
    #[error("search space of {size} points exceeds the limit of {limit}")]
    SearchTooLarge { size: u128, limit: u128 },

    /// A scenario does not supply enough data for the requested computation.
    #[error("configuration error: {0}")]
    Config(String),

    /// A node placement puts two Byzantines on one root-leaf path.
    #[error("placement puts more than one Byzantine on a path ({0}); such an allocation implies blinding")]
    OverlappingPlacement(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
