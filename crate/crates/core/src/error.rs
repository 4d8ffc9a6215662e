use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("cannot normalize a zero-length vector")]
    ZeroVector,
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("model `{0}` has no closed-form law; use `simulate`")]
    NoClosedForm(String),
    #[error("rejection envelope {envelope} violated: density {density} at f = {f}")]
    EnvelopeViolation { density: f64, envelope: f64, f: f64 },
    #[error("hidden sample variant does not match the model (expected {0})")]
    WrongVariant(&'static str),
    #[error("conditional outcome queried with incompatible priors")]
    IncompatiblePriors,
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("empty sample set")]
    EmptySample,
    #[error("watch desynchronized at trial {trial}: {detail}")]
    WatchDesync { trial: u64, detail: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
