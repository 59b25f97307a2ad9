use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("empty input to {0}")]
    Empty(&'static str),

    #[error("target vector is not one-hot")]
    NotOneHot,

    #[error("backward called before a forward pass was recorded")]
    BackwardBeforeForward,

    #[error("no gradients populated for parameter `{0}`")]
    MissingGrad(String),

    #[error("unknown parameter `{0}`")]
    UnknownParam(String),

    #[error("duplicate parameter `{0}`")]
    DuplicateParam(String),

    #[error("shape mismatch for parameter `{name}`: expected {expected:?}, found {found:?}")]
    ParamShape {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("checkpoint format error: {0}")]
    Format(String),

    #[error("loss function is not deterministic ({first} != {second})")]
    NonDeterministic { first: f64, second: f64 },

    #[error("line {line}: {message}")]
    Corpus { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("label stream rejected: {0}")]
    Parse(String),

    #[error("process model is not sound: {0}")]
    Unsound(String),

    #[error("gradient check failed: max relative error {max_rel_err:e} exceeds {tolerance:e}")]
    GradCheckFailed { max_rel_err: f64, tolerance: f64 },

    #[error("vocabulary mismatch: model expects {expected}, found {found}")]
    VocabMismatch { expected: String, found: String },

    #[error("{0}")]
    Unknown(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape {
            op,
            detail: detail.into(),
        }
    }

    /// Errors caused by bad user input rather than by the environment.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Corpus { .. }
                | Error::Config(_)
                | Error::Parse(_)
                | Error::VocabMismatch { .. }
                | Error::ParamShape { .. }
                | Error::Unknown(_)
                | Error::NotOneHot
        )
    }
}
