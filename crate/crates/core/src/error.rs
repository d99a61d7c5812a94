use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("point outside the domain of {objective}: {detail}")]
    Domain { objective: String, detail: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset contains a single label class")]
    DegenerateDataset,

    #[error("insufficient data: {rows} rows for {folds} folds")]
    InsufficientData { rows: usize, folds: usize },

    #[error("rejection sampler exhausted after {attempts} attempts")]
    SamplingExhausted { attempts: u64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("all buffered values binarize to one label")]
    DegenerateBuffer,

    #[error("statistic undefined: {0}")]
    Statistic(String),

    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),

    #[error("evaluation of trial {trial} panicked: {message}")]
    EvaluationPanicked { trial: usize, message: String },

    #[error("malformed trial log at line {line}: {detail}")]
    MalformedLog { line: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
