use std::io;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by corpus parsing, conversion, training, decoding and
/// evaluation. Line and token positions are 1-based and 0-based
/// respectively, matching what the diagnostics print.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("no sentences found in input")]
    EmptyCorpus,

    #[error("line {line}: unbalanced group")]
    UnbalancedGroup { line: usize },

    #[error("line {line}: missing sentence delimiter")]
    MissingSentenceDelimiter { line: usize },

    #[error("line {line}: malformed token line: {reason}")]
    MalformedTokenLine { line: usize, reason: String },

    #[error("invalid tag scheme at token {position}: {reason}")]
    InvalidScheme { position: usize, reason: String },

    #[error("overlapping spans at token {position}")]
    OverlappingSpans { position: usize },

    #[error("span end {end} out of bounds for sentence of length {len}")]
    SpanOutOfBounds { end: usize, len: usize },

    #[error("sentence {sentence} is untagged")]
    UntaggedSentence { sentence: usize },

    #[error("corpus too degenerate to estimate interpolation weights")]
    DegenerateCorpus,

    #[error("unknown tag {tag:?}")]
    UnknownTag { tag: String },

    #[error("unknown observation {surface:?}")]
    UnknownObservation { surface: String },

    #[error("no rare observations to build a suffix model from")]
    NoRareWords,

    #[error("cannot decode an empty sentence")]
    EmptySentence,

    #[error("no viable path at token {position}")]
    NoViablePath { position: usize },

    #[error("corpora diverge at sentence {sentence}: {reason}")]
    CorpusMismatch { sentence: usize, reason: String },

    #[error("sentence {sentence}: {source}")]
    InSentence {
        sentence: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model file line {line}: {reason}")]
    ModelFormat { line: usize, reason: String },

    #[error("unsupported model format version {found:?}")]
    UnsupportedVersion { found: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Wraps the error with the index of the sentence it occurred in.
    pub fn in_sentence(self, sentence: usize) -> Error {
        Error::InSentence {
            sentence,
            source: Box::new(self),
        }
    }
}
