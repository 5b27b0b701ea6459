//! Vocabulary handling and two-stage tokenization: a basic word splitter
//! followed by greedy WordPiece, with character offsets kept for every piece.

mod basic;
mod vocab;
mod wordpiece;

use thiserror::Error;

pub use basic::{basic_tokenize, Word};
pub use vocab::{
    is_placeholder, load_vocab, save_vocab, Vocabulary, CLS, MASK, MAX_PLACEHOLDERS, PAD,
    SEP, SPECIAL_TOKENS, UNK,
};
pub use wordpiece::{wordpiece, CONTINUATION_PREFIX, DEFAULT_MAX_WORD_CHARS};


#[derive(Debug, Error)]
pub enum TokenizerError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("empty token on line {line}")]
    EmptyToken { line: usize },
    #[error("duplicate token {token:?} on lines {first_line} and {second_line}")]
    DuplicateToken {
        token: String,
        first_line: usize,
        second_line: usize,
    },
    #[error("vocabulary is missing special token {0}")]
    MissingSpecial(String),
    #[error("vocabulary has {0} placeholder slots, more than the {max} allowed", max = MAX_PLACEHOLDERS)]
    TooManyPlaceholders(usize),
}

/// Sub-word tokenization of one text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenizedText {
    pub pieces: Vec<String>,
    pub ids: Vec<u32>,
    /// `(start, end)` character range of each piece in the source text.
    pub offsets: Vec<(usize, usize)>,
    /// Ordinal of the source word each piece came from.
    pub word_index: Vec<usize>,
    pub is_continuation: Vec<bool>,
    /// Character range of each source word.
    pub word_spans: Vec<(usize, usize)>,
}

impl TokenizedText {
    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn n_words(&self) -> usize {
        self.word_spans.len()
    }

    /// Piece positions that start a word.
    pub fn word_starts(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| !self.is_continuation[i])
    }
}

/// Basic splitting followed by WordPiece over each word.
pub fn tokenize(text: &str, vocab: &Vocabulary) -> TokenizedText {
    let mut out = TokenizedText::default();
    for (w, word) in basic_tokenize(text).into_iter().enumerate() {
        out.word_spans.push((word.start, word.end));
        let chars: Vec<char> = word.text.chars().collect();
        match wordpiece::segment(&chars, vocab, DEFAULT_MAX_WORD_CHARS) {
            Some(pieces) => {
                for p in pieces {
                    out.pieces
                        .push(vocab.token(p.id).unwrap_or_default().to_string());
                    out.ids.push(p.id);
                    out.offsets.push((word.start + p.start, word.start + p.end));
                    out.word_index.push(w);
                    out.is_continuation.push(p.start > 0);
                }
            }
            None => {
                out.pieces.push(UNK.to_string());
                out.ids.push(vocab.unk_id());
                out.offsets.push((word.start, word.end));
                out.word_index.push(w);
                out.is_continuation.push(false);
            }
        }
    }
    out
}

/// Fixed-length model input: `[CLS] pieces [SEP]` padded with `[PAD]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelInput {
    pub ids: Vec<u32>,
    pub attention_mask: Vec<u8>,
}

pub const DEFAULT_MAX_LEN: usize = 128;

/// Wraps piece ids with `[CLS]`/`[SEP]`, truncating to `max_len - 2` pieces
/// and padding to exactly `max_len`.
pub fn encode_for_model(tokenized: &TokenizedText, vocab: &Vocabulary, max_len: usize) -> ModelInput {
    assert!(max_len >= 2, "max_len must leave room for [CLS] and [SEP]");
    let keep = tokenized.len().min(max_len - 2);
    let mut ids = Vec::with_capacity(max_len);
    ids.push(vocab.cls_id());
    ids.extend_from_slice(&tokenized.ids[..keep]);
    ids.push(vocab.sep_id());
    let mut attention_mask = vec![1u8; ids.len()];
    ids.resize(max_len, vocab.pad_id());
    attention_mask.resize(max_len, 0);
    ModelInput {
        ids,
        attention_mask,
    }
}
