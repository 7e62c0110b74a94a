use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("model has no boxes")]
    EmptyModel,

    #[error("empty input")]
    EmptyInput,

    #[error("invalid box: {0}")]
    InvalidBox(&'static str),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("no box carries a label different from {0}")]
    NoOpposingBox(usize),

    #[error("requested {requested} samples but only {available} are available")]
    NotEnoughSamples { requested: usize, available: usize },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite loss at epoch {epoch}, step {step}")]
    NonFiniteLoss { epoch: usize, step: usize },

    #[error(
        "attack search needs {candidates} candidates, budget is {budget}; shrink the instance"
    )]
    BudgetExceeded { candidates: u128, budget: u128 },

    #[error("class balls overlap or leave the unit cube")]
    InvalidSynthSpec,

    #[error("box has zero volume")]
    ZeroVolume,
}
