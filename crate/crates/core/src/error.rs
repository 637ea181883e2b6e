use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },

    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("cycle detected: {}", .0.join("→"))]
    Cycle(Vec<String>),

    #[error("duplicate equation for `{0}`")]
    DuplicateEquation(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),

    #[error("invalid domain for `{name}`: {reason}")]
    InvalidDomain { name: String, reason: String },

    #[error("missing value for exogenous variable `{0}`")]
    MissingExogenous(String),

    #[error("value {value} outside the domain of `{variable}`")]
    DomainViolation { variable: String, value: String },

    #[error("cannot enumerate worlds: exogenous variable `{0}` is real-valued")]
    NotEnumerable(String),

    #[error("variable `{0}` appears more than once in the intervention")]
    DuplicateIntervention(String),

    #[error("cause `{variable}` does not hold in the factual world (stated {stated}, actual {actual})")]
    CauseMismatch {
        variable: String,
        stated: String,
        actual: String,
    },

    #[error("alternate value for `{0}` equals its actual value")]
    AlternateEqualsActual(String),

    #[error("no default alternate for `{0}`; supply one explicitly")]
    AlternateRequired(String),

    #[error("{what} exceeds the cap of {limit}")]
    CapExceeded { what: String, limit: u64 },

    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    #[error("training diverged at step {step}")]
    Divergence { step: usize },

    #[error("empty {0}")]
    Empty(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("example {index}: {source}")]
    Example {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Runtime failures (caps, numeric trouble) as opposed to bad input.
    pub fn is_runtime(&self) -> bool {
        match self {
            Error::CapExceeded { .. } | Error::NonFinite(_) | Error::MetricUndefined(_) | Error::Divergence { .. } => {
                true
            }
            Error::Example { source, .. } => source.is_runtime(),
            _ => false,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn at_example(self, index: usize) -> Self {
        Error::Example {
            index,
            source: Box::new(self),
        }
    }
}
