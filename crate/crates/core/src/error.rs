use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty word")]
    EmptyWord,

    #[error("symbol {symbol:?} at position {position} is not in the alphabet")]
    SymbolOutsideAlphabet { symbol: char, position: usize },

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("letter {0:?} is not mapped by the bijection")]
    UnmappedLetter(char),

    #[error("bijection is not injective: {0:?} has two preimages")]
    NotInjective(char),

    #[error("subword index {index} out of range (table size {size})")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("word length {actual} does not match configured length {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("shape mismatch at layer {layer} ({kind}): {detail}")]
    Shape {
        layer: usize,
        kind: &'static str,
        detail: String,
    },

    #[error("impossible dataset request: {0}")]
    Impossible(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("checkpoint blob has {actual} bytes, expected {expected}")]
    TruncatedBlob { expected: usize, actual: usize },

    #[error("training diverged at epoch {epoch}, step {step}: loss {loss}")]
    Diverged { epoch: usize, step: usize, loss: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
