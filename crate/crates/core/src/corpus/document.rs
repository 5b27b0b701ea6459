use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusError, EntityLabel};

/// A labelled character range. Offsets count Unicode scalar values;
/// `start` is inclusive and `end` exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub label: EntityLabel,
}

impl EntitySpan {
    pub fn new(start: usize, end: usize, label: EntityLabel) -> Self {
        Self { start, end, label }
    }

    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    #[serde(default)]
    pub entities: Vec<EntitySpan>,
}

impl Document {
    /// Builds a document, sorting its spans and checking every invariant.
    pub fn new(
        doc_id: impl Into<String>,
        text: impl Into<String>,
        mut entities: Vec<EntitySpan>,
    ) -> Result<Self, CorpusError> {
        entities.sort();
        let doc = Self {
            doc_id: doc_id.into(),
            text: text.into(),
            entities,
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let len = self.char_len();
        let mut seen = HashSet::new();
        for span in &self.entities {
            if span.start >= span.end || span.end > len {
                return Err(CorpusError::SpanOutOfBounds {
                    doc_id: self.doc_id.clone(),
                    start: span.start,
                    end: span.end,
                    len,
                });
            }
            if !seen.insert(*span) {
                return Err(CorpusError::DuplicateSpan {
                    doc_id: self.doc_id.clone(),
                    start: span.start,
                    end: span.end,
                });
            }
        }
        if self.entities.windows(2).any(|w| w[0].start > w[1].start) {
            return Err(CorpusError::UnsortedSpans(self.doc_id.clone()));
        }
        Ok(())
    }

    /// Text covered by a span. Panics if the span is out of bounds.
    pub fn span_text(&self, span: &EntitySpan) -> String {
        char_slice(&self.text, span.start, span.end)
    }
}

/// Slice `text` by Unicode scalar offsets.
pub fn char_slice(text: &str, start: usize, end: usize) -> String {
    text.chars().skip(start).take(end.saturating_sub(start)).collect()
}

pub fn parse_corpus<R: BufRead>(reader: R) -> Result<Vec<Document>, CorpusError> {
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut doc: Document =
            serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        doc.entities.sort();
        doc.validate()?;
        docs.push(doc);
    }
    Ok(docs)
}

/// Reads a line-delimited JSON corpus, one document per line.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>, CorpusError> {
    let file = fs::File::open(path.as_ref())?;
    parse_corpus(BufReader::new(file))
}

pub fn write_corpus<W: Write>(mut writer: W, docs: &[Document]) -> Result<(), CorpusError> {
    for doc in docs {
        serde_json::to_writer(&mut writer, doc).map_err(|e| CorpusError::Parse {
            line: 0,
            message: e.to_string(),
        })?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn save_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<(), CorpusError> {
    let file = fs::File::create(path.as_ref())?;
    write_corpus(BufWriter::new(file), docs)
}
