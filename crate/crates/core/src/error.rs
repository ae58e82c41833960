use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an input value was violated. The message names it.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed curve: {0}")]
    MalformedCurve(String),

    #[error("curves and oracles live on different surfaces ({curve} vs {oracle})")]
    SurfaceMismatch { curve: String, oracle: String },

    #[error("oracle failed at t = {t}: {source}")]
    OracleAt {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    /// A search ran out of its node/depth budget before it was exhausted.
    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("mesh too large: {vertices} vertices exceeds cap {cap}")]
    MeshTooLarge { vertices: usize, cap: usize },

    #[error("disconnected: {0}")]
    Disconnected(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("no geodesic hit the target: {0}")]
    NoHit(String),

    #[error("iteration cap of {0} reached before convergence")]
    IterationCap(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
