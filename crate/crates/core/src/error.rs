use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("csv column `{0}` not found in header")]
    MissingColumn(String),

    #[error("corpus `{0}` is empty")]
    EmptyCorpus(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sentence has no tokens")]
    EmptySentence,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unsmoothed zero-probability event in context {context:?} for `{term}`")]
    UnsmoothedZero { context: Vec<String>, term: String },

    #[error("rating {value} in column `{column}` at row {row} is outside 1..=5")]
    RatingOutOfRange {
        row: usize,
        column: String,
        value: i64,
    },

    #[error("http request to {url} failed: {message}")]
    Http { url: String, message: String },

    #[error("http request to {url} returned status {status}")]
    HttpStatus { url: String, status: u16 },

    #[error("malformed response from {url}: {message}")]
    BadResponse { url: String, message: String },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{message}")]
    Parse { message: String },

    #[error("{module} failed on corpus `{corpus}`{}: {source}", sentence_suffix(.sentence))]
    Metric {
        module: &'static str,
        corpus: String,
        sentence: Option<usize>,
        #[source]
        source: Box<Error>,
    },
}

fn sentence_suffix(sentence: &Option<usize>) -> String {
    match sentence {
        Some(id) => format!(" at sentence {id}"),
        None => String::new(),
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(message: impl Into<String>) -> Self {
        Error::Parse {
            message: message.into(),
        }
    }

    /// Attaches module/corpus/sentence provenance to a metric failure.
    pub fn in_metric(self, module: &'static str, corpus: &str, sentence: Option<usize>) -> Self {
        Error::Metric {
            module,
            corpus: corpus.to_string(),
            sentence,
            source: Box::new(self),
        }
    }
}
