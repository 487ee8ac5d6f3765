use std::path::PathBuf;

use thiserror::Error;

/// The 17 universal POS tags accepted in patterns.
pub const UPOS_TAGS: [&str; 17] = [
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM", "PART", "PRON", "PROPN",
    "PUNCT", "SCONJ", "SYM", "VERB", "X",
];

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{what}: source has {source_len} lines but target has {target_len}")]
    LengthMismatch {
        what: &'static str,
        source_len: usize,
        target_len: usize,
    },

    #[error("line {line}: invalid JSON: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("attention record {id:?}: row {row} sums to {sum}, expected 1 within 1e-4")]
    RowSum { id: String, row: usize, sum: f64 },

    #[error("attention record {id:?}: {message}")]
    Dimension { id: String, message: String },

    #[error("attention record {id:?}: entry ({row}, {col}) = {value} is outside [0, 1]")]
    Probability {
        id: String,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("attention record {id:?}: {side} units end with a dangling `@@` continuation")]
    DanglingContinuation { id: String, side: &'static str },

    #[error(transparent)]
    Pattern(#[from] PatternError),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid layout: {0}")]
    Layout(String),

    #[error("span {start}..={end} out of bounds for {side} of length {len}")]
    Span {
        side: &'static str,
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("unknown render format {0:?} (expected text, svg or html)")]
    UnknownFormat(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern line has no `name:` prefix")]
    MissingName,

    #[error("pattern {name:?} has no items")]
    Empty { name: String },

    #[error("unknown UPOS tag {tag:?}; valid tags are {}", UPOS_TAGS.join(", "))]
    UnknownTag { tag: String },

    #[error("unbalanced parenthesis in pattern {name:?}")]
    Unbalanced { name: String },

    #[error("pattern {name:?}: {message}")]
    Syntax { name: String, message: String },

    #[error(
        "pattern {name:?}: repetition bounds {{{min},{max}}} must satisfy 0 <= min <= max <= 8"
    )]
    RepeatBounds {
        name: String,
        min: usize,
        max: usize,
    },

    #[error("pattern {name:?} can match {min_len} token(s); an MWE needs at least 2")]
    TooShort { name: String, min_len: usize },

    #[error("duplicate pattern name {name:?}")]
    Duplicate { name: String },
}
