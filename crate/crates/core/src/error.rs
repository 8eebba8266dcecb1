use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("duplicate adjective {adjective:?} on line {line}")]
    DuplicateAdjective { adjective: String, line: usize },
    #[error("non-finite trait value in {0}")]
    NonFinite(String),
    #[error("need at least {needed} sentences, got {got}")]
    TooFewSentences { needed: usize, got: usize },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("{0:?} is not in the vocabulary")]
    UnknownWord(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("features do not match the model: {0}")]
    FeatureMismatch(String),
    #[error("training diverged at epoch {epoch}, batch {batch}: loss is {loss}")]
    Diverged { epoch: usize, batch: usize, loss: f64 },
    #[error(transparent)]
    Engine(#[from] autonet::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
