//! Annotated clinical documents: data model, BIO codec, synthetic corpus
//! generation, corpus statistics and inter-annotator agreement.

mod bio;
mod conll;
mod document;
mod kappa;
mod label;
mod split;
mod stats;
mod synth;

use thiserror::Error;

pub use bio::{
    decode_bio, encode_bio, wrap_special, AlignmentPolicy, AlignmentWarning, BioEncoding, Tag,
    TagSequence, N_TAGS,
};
pub use conll::write_conll;
pub use document::{
    char_slice, load_corpus, parse_corpus, save_corpus, write_corpus, Document, EntitySpan,
};
pub use kappa::{cohen_kappa, corpus_kappa, token_labels};
pub use label::EntityLabel;
pub use split::split_corpus;
pub use stats::{corpus_stats, split_sentences, CorpusStats, LabelStats, RuleSplitter, SentenceSplitter};
pub use synth::{generate_synthetic, LabelInventory, PhraseInventory};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("document {doc_id}: span {start}..{end} outside text of length {len}")]
    SpanOutOfBounds {
        doc_id: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("document {doc_id}: duplicate span {start}..{end}")]
    DuplicateSpan {
        doc_id: String,
        start: usize,
        end: usize,
    },
    #[error("document {0}: spans not sorted by start")]
    UnsortedSpans(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("span {0:?} does not align to word boundaries")]
    Misaligned(EntitySpan),
    #[error("orphan I- tag at piece {position}")]
    OrphanInside { position: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("{0}")]
    Empty(&'static str),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("document {0} missing from the other annotation")]
    MissingDocument(String),
    #[error("document {0} has different text in the two annotations")]
    TextMismatch(String),
}
