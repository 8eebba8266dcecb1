use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: shape mismatch, expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        op: &'static str,
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    #[error("invalid shape {0:?}: every dimension must be positive")]
    InvalidShape(Vec<usize>),

    #[error("{op}: kernel {kernel:?} is larger than the padded input {input:?}")]
    KernelTooLarge {
        op: &'static str,
        kernel: (usize, usize),
        input: (usize, usize),
    },

    #[error("{0}: stride and window sizes must be at least 1")]
    ZeroSize(&'static str),

    #[error("batch norm in train mode needs a batch of at least 2 rows, got {0}")]
    BatchTooSmall(usize),

    #[error("learning rate must be positive, got {0}")]
    InvalidLearningRate(f64),

    #[error("label {0} is not binary")]
    InvalidLabel(u8),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("backward called before forward")]
    NoForwardPass,

    #[error("network fragment is not deterministic: two identical forward passes disagree")]
    NonDeterministic,

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
