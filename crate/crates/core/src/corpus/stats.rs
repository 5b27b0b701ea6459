use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Document, EntityLabel};
use crate::tokenizer::basic_tokenize;

/// Splits text into sentence character ranges.
pub trait SentenceSplitter {
    fn split(&self, text: &str) -> Vec<(usize, usize)>;
}

/// Breaks on newlines and on a period followed by whitespace.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleSplitter;

impl SentenceSplitter for RuleSplitter {
    fn split(&self, text: &str) -> Vec<(usize, usize)> {
        split_sentences(text)
    }
}

pub fn split_sentences(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut push = |s: usize, e: usize| {
        let mut s = s;
        let mut e = e;
        while s < e && chars[s].is_whitespace() {
            s += 1;
        }
        while e > s && chars[e - 1].is_whitespace() {
            e -= 1;
        }
        if s < e {
            out.push((s, e));
        }
    };
    let mut start = 0;
    for i in 0..chars.len() {
        if chars[i] == '\n' {
            push(start, i);
            start = i + 1;
        } else if chars[i] == '.' && chars.get(i + 1).is_some_and(|c| c.is_whitespace()) {
            push(start, i + 1);
            start = i + 1;
        }
    }
    push(start, chars.len());
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelStats {
    pub mentions: usize,
    pub unique: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_documents: usize,
    pub n_sentences: usize,
    pub n_tokens: usize,
    pub per_label: BTreeMap<EntityLabel, LabelStats>,
}

/// Document, sentence and token counts plus per-label mention totals and
/// unique lowercased surface forms.
pub fn corpus_stats(corpus: &[Document], splitter: &dyn SentenceSplitter) -> CorpusStats {
    let mut stats = CorpusStats {
        n_documents: corpus.len(),
        ..Default::default()
    };
    let mut forms: BTreeMap<EntityLabel, HashSet<String>> = BTreeMap::new();
    for label in EntityLabel::ALL {
        stats.per_label.insert(label, LabelStats::default());
        forms.insert(label, HashSet::new());
    }
    for doc in corpus {
        stats.n_sentences += splitter.split(&doc.text).len();
        stats.n_tokens += basic_tokenize(&doc.text).len();
        for span in &doc.entities {
            if let Some(entry) = stats.per_label.get_mut(&span.label) {
                entry.mentions += 1;
            }
            if let Some(set) = forms.get_mut(&span.label) {
                set.insert(doc.span_text(span).to_lowercase());
            }
        }
    }
    for (label, set) in forms {
        if let Some(entry) = stats.per_label.get_mut(&label) {
            entry.unique = set.len();
        }
    }
    stats
}

impl CorpusStats {
    /// Tab-separated table: section, item, total, unique.
    pub fn to_table(&self) -> String {
        let mut out = String::from("section\titem\ttotal\tunique\n");
        let _ = writeln!(out, "annotated\tDocuments\t{}\tNA", self.n_documents);
        let _ = writeln!(out, "annotated\tTotal sentences\t{}\tNA", self.n_sentences);
        let _ = writeln!(out, "annotated\tTotal tokens\t{}\tNA", self.n_tokens);
        for (label, s) in &self.per_label {
            let _ = writeln!(out, "entity\t{}\t{}\t{}", label.display_name(), s.mentions, s.unique);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EntitySpan;

    #[test]
    fn splitter_rules() {
        let text = "Tumor size: 1.0 cm. Grade 2.\nLeft";
        let s = split_sentences(text);
        let parts: Vec<String> = s
            .iter()
            .map(|&(a, b)| text.chars().skip(a).take(b - a).collect())
            .collect();
        assert_eq!(parts, vec!["Tumor size: 1.0 cm.", "Grade 2.", "Left"]);
        assert!(split_sentences("  \n ").is_empty());
    }

    #[test]
    fn empty_corpus_is_all_zero() {
        let s = corpus_stats(&[], &RuleSplitter);
        assert_eq!((s.n_documents, s.n_sentences, s.n_tokens), (0, 0, 0));
        assert!(s.per_label.values().all(|l| l.mentions == 0 && l.unique == 0));
    }

    #[test]
    fn unique_forms_are_lowercased() {
        let d1 = Document::new("a", "Left breast", vec![EntitySpan::new(0, 4, EntityLabel::CancerLaterality)]).unwrap();
        let d2 = Document::new("b", "the left side", vec![EntitySpan::new(4, 8, EntityLabel::CancerLaterality)]).unwrap();
        let s = corpus_stats(&[d1.clone(), d2.clone()], &RuleSplitter);
        let lat = s.per_label[&EntityLabel::CancerLaterality];
        assert_eq!((lat.mentions, lat.unique), (2, 1));
        assert_eq!(s.n_tokens, 5);
        assert_eq!(corpus_stats(&[d2, d1], &RuleSplitter), s);
    }
}
