use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("simulation fault at t = {time:.6} s: {detail}")]
    SimulationFault { time: f64, detail: String },

    #[error("training aborted: {0}")]
    TrainingAbort(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("upstream stage `{stage}` has no artifact at {}; run `{stage}` first", path.display())]
    MissingArtifact { stage: String, path: PathBuf },

    #[error("stage `{stage}` produced no usable data: {detail}")]
    EmptyStage { stage: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format { what, detail: detail.into() }
    }
}
