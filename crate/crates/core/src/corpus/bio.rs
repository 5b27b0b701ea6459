use std::fmt;
use std::str::FromStr;

use super::{CorpusError, EntityLabel, EntitySpan};
use crate::tokenizer::TokenizedText;

/// Number of trainable tag classes: `O` plus `B-`/`I-` per label.
pub const N_TAGS: usize = 2 * EntityLabel::COUNT + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    O,
    B(EntityLabel),
    I(EntityLabel),
    /// Excluded from loss and decoding: special tokens and continuation pieces.
    Ignore,
}

impl Tag {
    /// Class index in `0..N_TAGS`, `None` for `Ignore`.
    pub fn class(self) -> Option<usize> {
        match self {
            Tag::O => Some(0),
            Tag::B(l) => Some(1 + 2 * l.index()),
            Tag::I(l) => Some(2 + 2 * l.index()),
            Tag::Ignore => None,
        }
    }

    pub fn from_class(class: usize) -> Option<Tag> {
        match class {
            0 => Some(Tag::O),
            c if c < N_TAGS => {
                let label = EntityLabel::from_index((c - 1) / 2)?;
                Some(if c % 2 == 1 { Tag::B(label) } else { Tag::I(label) })
            }
            _ => None,
        }
    }

    pub fn label(self) -> Option<EntityLabel> {
        match self {
            Tag::B(l) | Tag::I(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::O => f.write_str("O"),
            Tag::B(l) => write!(f, "B-{}", l.code()),
            Tag::I(l) => write!(f, "I-{}", l.code()),
            Tag::Ignore => f.write_str("IGNORE"),
        }
    }
}

impl FromStr for Tag {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let label = |code: &str| {
            EntityLabel::from_code(code)
                .or_else(|| code.parse().ok())
                .ok_or_else(|| CorpusError::UnknownLabel(s.to_string()))
        };
        match s {
            "O" => Ok(Tag::O),
            "IGNORE" => Ok(Tag::Ignore),
            _ => match s.split_once('-') {
                Some(("B", code)) => Ok(Tag::B(label(code)?)),
                Some(("I", code)) => Ok(Tag::I(label(code)?)),
                _ => Err(CorpusError::UnknownLabel(s.to_string())),
            },
        }
    }
}

/// Tags aligned one-to-one with the pieces of a [`TokenizedText`].
pub type TagSequence = Vec<Tag>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlignmentPolicy {
    /// Spans cutting through a word grow to cover the whole word.
    #[default]
    ExpandToWord,
    /// Such spans are rejected.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlignmentWarning {
    /// The span boundary fell inside a word and was widened.
    Expanded { original: EntitySpan, aligned: EntitySpan },
    /// The span touched no word at all.
    NoTokens(EntitySpan),
    /// The span overlaps words already tagged by an earlier span.
    Overlap(EntitySpan),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BioEncoding {
    pub tags: TagSequence,
    pub warnings: Vec<AlignmentWarning>,
}

/// Word-level BIO over word-initial pieces; continuation pieces get `Ignore`.
pub fn encode_bio(
    tokenized: &TokenizedText,
    entities: &[EntitySpan],
    policy: AlignmentPolicy,
) -> Result<BioEncoding, CorpusError> {
    let mut word_tags = vec![Tag::O; tokenized.n_words()];
    let mut warnings = Vec::new();

    let mut sorted = entities.to_vec();
    sorted.sort();
    for span in sorted {
        let words: Vec<usize> = tokenized
            .word_spans
            .iter()
            .enumerate()
            .filter(|(_, &(ws, we))| ws < span.end && span.start < we)
            .map(|(i, _)| i)
            .collect();
        let (Some(&first), Some(&last)) = (words.first(), words.last()) else {
            warnings.push(AlignmentWarning::NoTokens(span));
            continue;
        };
        let aligned = EntitySpan::new(
            tokenized.word_spans[first].0,
            tokenized.word_spans[last].1,
            span.label,
        );
        if aligned != span {
            if policy == AlignmentPolicy::Strict {
                return Err(CorpusError::Misaligned(span));
            }
            warnings.push(AlignmentWarning::Expanded {
                original: span,
                aligned,
            });
        }
        if words.iter().any(|&w| word_tags[w] != Tag::O) {
            warnings.push(AlignmentWarning::Overlap(span));
            continue;
        }
        for (k, &w) in words.iter().enumerate() {
            word_tags[w] = if k == 0 {
                Tag::B(span.label)
            } else {
                Tag::I(span.label)
            };
        }
    }
    for w in &warnings {
        log::debug!("bio alignment: {w:?}");
    }

    let tags = (0..tokenized.len())
        .map(|i| {
            if tokenized.is_continuation[i] {
                Tag::Ignore
            } else {
                word_tags[tokenized.word_index[i]]
            }
        })
        .collect();
    Ok(BioEncoding { tags, warnings })
}

/// Inverse of [`encode_bio`]. Reads tags at word-initial pieces only.
///
/// An `I-X` that does not continue an `X` run starts a new span (repaired to
/// `B-X`) unless `strict` is set, in which case it is an error.
pub fn decode_bio(
    tags: &[Tag],
    tokenized: &TokenizedText,
    strict: bool,
) -> Result<Vec<EntitySpan>, CorpusError> {
    if tags.len() != tokenized.len() {
        return Err(CorpusError::LengthMismatch {
            left: tags.len(),
            right: tokenized.len(),
        });
    }
    let mut spans = Vec::new();
    let mut open: Option<(EntityLabel, usize, usize)> = None;
    let close = |open: &mut Option<(EntityLabel, usize, usize)>, spans: &mut Vec<EntitySpan>| {
        if let Some((label, first, last)) = open.take() {
            spans.push(EntitySpan::new(
                tokenized.word_spans[first].0,
                tokenized.word_spans[last].1,
                label,
            ));
        }
    };

    for i in tokenized.word_starts() {
        let word = tokenized.word_index[i];
        match tags[i] {
            Tag::B(label) => {
                close(&mut open, &mut spans);
                open = Some((label, word, word));
            }
            Tag::I(label) => match open.as_mut() {
                Some((l, _, last)) if *l == label => *last = word,
                _ => {
                    if strict {
                        return Err(CorpusError::OrphanInside { position: i });
                    }
                    close(&mut open, &mut spans);
                    open = Some((label, word, word));
                }
            },
            Tag::O | Tag::Ignore => close(&mut open, &mut spans),
        }
    }
    close(&mut open, &mut spans);
    Ok(spans)
}

/// Prepends and appends `Ignore` for `[CLS]`/`[SEP]`, truncating like
/// [`crate::tokenizer::encode_for_model`].
pub fn wrap_special(tags: &[Tag], max_len: usize) -> TagSequence {
    let keep = tags.len().min(max_len.saturating_sub(2));
    let mut out = Vec::with_capacity(keep + 2);
    out.push(Tag::Ignore);
    out.extend_from_slice(&tags[..keep]);
    out.push(Tag::Ignore);
    out
}
