use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bins: {0}")]
    InvalidBins(String),

    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mismatched histograms: {0}")]
    Mismatch(String),

    #[error("gradient check plan is degenerate: every sampled point was excluded")]
    DegeneratePlan,

    #[error("pipeline stages out of order: {0}")]
    BadPipeline(String),

    #[error("training aborted at step {step}: {detail}")]
    NonFiniteTraining { step: usize, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {detail}")]
    Parse {
        path: String,
        line: usize,
        detail: String,
    },

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}
