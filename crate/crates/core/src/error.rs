use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid relay state: {0}")]
    InvalidState(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("{what}: size {size} exceeds the exhaustive limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("no convergence after {iterations} iterations (bounds [{lower}, {upper}])")]
    NoConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("numerical degeneracy: {0}")]
    Numerical(String),

    #[error("linear program is {0}")]
    LpStatus(&'static str),

    #[error("solver diagnostic: {0}")]
    Diagnostic(String),

    #[error("simple schedule extraction exhausted its fallbacks (best tau {best_tau})")]
    ExtractionExhausted { best_tau: f64 },

    #[error("certificate failure: {message}")]
    Certificate { message: String, witness: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
