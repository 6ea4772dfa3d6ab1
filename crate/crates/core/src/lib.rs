//! A trigram hidden-Markov-model named-entity tagger for POS-tagged,
//! chunked text.
//!
//! The observed symbol is the triplet of word, POS tag and chunk tag;
//! the hidden state is an NE tag in the B/I/E/O scheme. Training
//! collects tag n-gram counts smoothed by deleted interpolation,
//! observation counts, and a suffix model over rare pseudo-words used to
//! score unknown triplets by Bayesian inversion. Decoding is trigram
//! Viterbi in log space followed by an orphan-I-run repair, and
//! evaluation is exact-span precision/recall/F.
//!
//! The pipeline, end to end:
//!
//! ```
//! use tritag::{parse_tsv, train, tag_corpus_serial, evaluate};
//! use tritag::{DecodeOptions, EvalMode, TrainOptions};
//!
//! let gold = parse_tsv("Kolkata\tNNP\tB-NP\tB-LOC\n\nKolkata\tNNP\tB-NP\tB-LOC\n").unwrap();
//! let model = train(&gold, &TrainOptions::default()).unwrap();
//! let tagged = tag_corpus_serial(&model, &gold.stripped(), &DecodeOptions::default()).unwrap();
//! let report = evaluate(&gold, &tagged, EvalMode::Span).unwrap();
//! assert_eq!(report.overall.f_measure(), 1.0);
//! ```
//!
//! With the `parallel` feature (default) the batch tagging entry point
//! decodes sentences on a rayon pool; output is byte-identical to the
//! sequential path.

pub mod corpus;
pub mod decoder;
pub mod emission;
pub mod error;
pub mod evaluator;
pub mod model_file;
pub mod spans;
pub mod ssf;
#[cfg(feature = "synth")]
pub mod synth;
pub mod train;
pub mod transition;
pub mod tsv;

pub use corpus::{Corpus, NeKind, NeTag, ObservationTriplet, Sentence};
pub use decoder::{
    postprocess, tag_corpus, tag_corpus_serial, viterbi_decode, DecodeOptions, EndTransition,
    TrainedModel, FORMAT_VERSION,
};
pub use emission::{EmissionMode, EmissionModel, SuffixModel, SuffixParams, FIELD_SEPARATOR};
pub use error::{Error, Result};
pub use evaluator::{evaluate, render_text, render_tsv, EvalCounts, EvalMode, EvalReport};
pub use spans::{augment_end_tags, spans_to_tags, tags_to_spans, EntitySpan, SpanMode};
pub use ssf::parse_ssf;
pub use train::{train, Lang, TrainOptions, DEFAULT_RARE_MAX, DEFAULT_SUFFIX_LEN};
pub use transition::{
    count_ngrams, estimate_lambdas, Hist, Lambdas, Next, TagId, TagInventory, TransitionModel,
};
pub use tsv::{parse_tsv, to_tsv, to_tsv_stripped};
