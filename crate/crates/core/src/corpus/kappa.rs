use std::collections::HashMap;
use std::hash::Hash;

use super::{CorpusError, Document, EntityLabel, Tag};
use crate::tokenizer::basic_tokenize;

/// Cohen's kappa between two annotators' label sequences.
///
/// Computed from integer counts so the result is exactly symmetric.
pub fn cohen_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64, CorpusError> {
    if a.len() != b.len() {
        return Err(CorpusError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(CorpusError::Empty("kappa needs at least one label"));
    }
    let n = a.len() as u128;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as u128;
    let mut counts: HashMap<&T, (u128, u128)> = HashMap::new();
    for x in a {
        counts.entry(x).or_default().0 += 1;
    }
    for y in b {
        counts.entry(y).or_default().1 += 1;
    }
    let chance: u128 = counts.values().map(|(ca, cb)| ca * cb).sum();
    let denom = n * n - chance;
    if denom == 0 {
        // both annotators used one identical label throughout
        return Ok(1.0);
    }
    Ok(((agree * n) as f64 - chance as f64) / denom as f64)
}

/// Word-level BIO labels of a document, the unit for agreement.
pub fn token_labels(doc: &Document) -> Vec<Tag> {
    let words = basic_tokenize(&doc.text);
    let mut tags = vec![Tag::O; words.len()];
    for span in &doc.entities {
        let mut first = true;
        for (i, w) in words.iter().enumerate() {
            if w.start < span.end && span.start < w.end && tags[i] == Tag::O {
                tags[i] = if first { Tag::B(span.label) } else { Tag::I(span.label) };
                first = false;
            }
        }
    }
    tags
}

/// Token-level kappa over two annotations of the same documents.
pub fn corpus_kappa(a: &[Document], b: &[Document]) -> Result<f64, CorpusError> {
    let by_id: HashMap<&str, &Document> = b.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let mut la = Vec::new();
    let mut lb = Vec::new();
    for doc in a {
        let other = by_id
            .get(doc.doc_id.as_str())
            .ok_or_else(|| CorpusError::MissingDocument(doc.doc_id.clone()))?;
        if other.text != doc.text {
            return Err(CorpusError::TextMismatch(doc.doc_id.clone()));
        }
        la.extend(token_labels(doc).into_iter().map(tag_key));
        lb.extend(token_labels(other).into_iter().map(tag_key));
    }
    if b.len() != a.len() {
        return Err(CorpusError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    cohen_kappa(&la, &lb)
}

fn tag_key(tag: Tag) -> (u8, Option<EntityLabel>) {
    match tag {
        Tag::O => (0, None),
        Tag::B(l) => (1, Some(l)),
        Tag::I(l) => (2, Some(l)),
        Tag::Ignore => (3, None),
    }
}
