//! Mining out-of-vocabulary words from a corpus and writing them into the
//! `[unusedN]` slots of a vocabulary, either by frequency rank or from a
//! curated word list, plus coverage of annotated tokens.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Document, EntityLabel};
use crate::tokenizer::{basic_tokenize, TokenizerError, Vocabulary, MAX_PLACEHOLDERS};

#[derive(Debug, Error)]
pub enum ExpandError {
    #[error("requested {requested} new words but only {available} placeholder slots are free (cap {cap})", cap = MAX_PLACEHOLDERS)]
    Capacity { requested: usize, available: usize },
    #[error(transparent)]
    Tokenizer(#[from] TokenizerError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateFilters {
    pub min_count: usize,
    /// Keep only words containing at least one alphabetic character.
    pub require_alpha: bool,
    pub min_len: usize,
}

impl Default for CandidateFilters {
    fn default() -> Self {
        Self {
            min_count: 5,
            require_alpha: true,
            min_len: 2,
        }
    }
}

/// `(word, frequency)` sorted by frequency descending, then lexicographically.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateList {
    pub entries: Vec<(String, usize)>,
}

impl CandidateList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(w, _)| w.as_str())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("word\tcount\n");
        for (w, c) in &self.entries {
            let _ = writeln!(out, "{w}\t{c}");
        }
        out
    }
}

pub fn extract_candidates<I, S>(texts: I, vocab: &Vocabulary, filters: &CandidateFilters) -> CandidateList
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts: HashMap<String, usize> = HashMap::new();
    for text in texts {
        for word in basic_tokenize(text.as_ref()) {
            *counts.entry(word.text).or_default() += 1;
        }
    }
    let mut entries: Vec<(String, usize)> = counts
        .into_iter()
        .filter(|(w, c)| {
            *c >= filters.min_count
                && w.chars().count() >= filters.min_len
                && (!filters.require_alpha || w.chars().any(char::is_alphabetic))
                && !vocab.contains(w)
        })
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    CandidateList { entries }
}

pub fn extract_corpus_candidates(corpus: &[Document], vocab: &Vocabulary, filters: &CandidateFilters) -> CandidateList {
    extract_candidates(corpus.iter().map(|d| d.text.as_str()), vocab, filters)
}

/// Result of an expansion: the new vocabulary and what changed.
#[derive(Debug, Clone)]
pub struct Expansion {
    pub vocab: Vocabulary,
    /// `(id, word)` for every slot that was overwritten, ascending id.
    pub rewritten: Vec<(u32, String)>,
    /// Words skipped because they already were whole-word entries.
    pub notices: Vec<String>,
}

fn fill_slots(vocab: &Vocabulary, words: Vec<String>, notices: Vec<String>) -> Result<Expansion, ExpandError> {
    let slots = vocab.placeholder_ids();
    if words.len() > slots.len() {
        return Err(ExpandError::Capacity {
            requested: words.len(),
            available: slots.len(),
        });
    }
    let rewritten: Vec<(u32, String)> = slots.into_iter().zip(words).collect();
    Ok(Expansion {
        vocab: vocab.with_replaced(&rewritten)?,
        rewritten,
        notices,
    })
}

/// Writes the `k` most frequent candidates into placeholder slots in id
/// order. Fewer than `k` candidates means all of them are used.
pub fn expand_frequency(vocab: &Vocabulary, candidates: &CandidateList, k: usize) -> Result<Expansion, ExpandError> {
    let available = vocab.placeholder_ids().len();
    if k > available {
        return Err(ExpandError::Capacity {
            requested: k,
            available,
        });
    }
    let words: Vec<String> = candidates
        .words()
        .filter(|w| !vocab.contains(w))
        .take(k)
        .map(str::to_string)
        .collect();
    if words.len() < k {
        log::info!("only {} of {k} requested candidates available", words.len());
    }
    fill_slots(vocab, words, Vec::new())
}

/// Writes a curated word list into placeholder slots. Words already in the
/// vocabulary are skipped with a notice.
pub fn expand_curated<S: AsRef<str>>(vocab: &Vocabulary, wordlist: &[S]) -> Result<Expansion, ExpandError> {
    let mut seen = BTreeSet::new();
    let mut words = Vec::new();
    let mut notices = Vec::new();
    for w in wordlist {
        let w = w.as_ref().trim().to_lowercase();
        if w.is_empty() || !seen.insert(w.clone()) {
            continue;
        }
        if vocab.contains(&w) {
            log::info!("{w:?} already in vocabulary, skipped");
            notices.push(w);
        } else {
            words.push(w);
        }
    }
    fill_slots(vocab, words, notices)
}

/// One word per line; blank lines and lines starting with `#` are ignored.
pub fn parse_wordlist(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub fn load_wordlist(path: impl AsRef<Path>) -> Result<Vec<String>, ExpandError> {
    Ok(parse_wordlist(&fs::read_to_string(path)?))
}

/// Curated cancer terms shipped with the crate.
pub fn builtin_curated_wordlist() -> Vec<String> {
    parse_wordlist(include_str!("../data/curated_terms.txt"))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub unique_tokens: usize,
    pub covered: usize,
    /// Percentage rounded to one decimal.
    pub pct: f64,
}

impl CoverageRow {
    fn new(unique_tokens: usize, covered: usize) -> Self {
        let pct = if unique_tokens == 0 {
            0.0
        } else {
            (1000.0 * covered as f64 / unique_tokens as f64).round() / 10.0
        };
        Self {
            unique_tokens,
            covered,
            pct,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub per_label: BTreeMap<EntityLabel, CoverageRow>,
    /// Over the union of tokens across labels, so a word shared by two
    /// labels counts once.
    pub total: CoverageRow,
}

/// Unique lowercased words inside gold spans, per label.
pub fn annotated_tokens(corpus: &[Document]) -> BTreeMap<EntityLabel, BTreeSet<String>> {
    let mut tokens: BTreeMap<EntityLabel, BTreeSet<String>> =
        EntityLabel::ALL.iter().map(|&l| (l, BTreeSet::new())).collect();
    for doc in corpus {
        let words = basic_tokenize(&doc.text);
        for span in &doc.entities {
            let set = tokens.entry(span.label).or_default();
            for w in words.iter().filter(|w| w.start < span.end && span.start < w.end) {
                set.insert(w.text.clone());
            }
        }
    }
    tokens
}

pub fn coverage(vocab: &Vocabulary, corpus: &[Document]) -> CoverageReport {
    let tokens = annotated_tokens(corpus);
    let mut report = CoverageReport::default();
    let mut union = BTreeSet::new();
    for (label, set) in &tokens {
        let covered = set.iter().filter(|t| vocab.contains(t)).count();
        report.per_label.insert(*label, CoverageRow::new(set.len(), covered));
        union.extend(set.iter().cloned());
    }
    let covered = union.iter().filter(|t| vocab.contains(t)).count();
    report.total = CoverageRow::new(union.len(), covered);
    report
}

/// Tab-separated table: one row per label plus a total row, one
/// `covered (pct%)` column per named vocabulary.
pub fn coverage_table(columns: &[(&str, &CoverageReport)]) -> String {
    let mut out = String::from("entity\tunique_tokens");
    for (name, _) in columns {
        let _ = write!(out, "\t{name}");
    }
    out.push('\n');
    let row = |out: &mut String, name: &str, pick: &dyn Fn(&CoverageReport) -> CoverageRow| {
        let unique = columns.first().map(|(_, r)| pick(r).unique_tokens).unwrap_or(0);
        let _ = write!(out, "{name}\t{unique}");
        for (_, r) in columns {
            let c = pick(r);
            let _ = write!(out, "\t{} ({:.1}%)", c.covered, c.pct);
        }
        out.push('\n');
    };
    for label in EntityLabel::ALL {
        row(&mut out, label.display_name(), &|r: &CoverageReport| {
            r.per_label.get(&label).copied().unwrap_or_default()
        });
    }
    row(&mut out, "Total", &|r: &CoverageReport| r.total);
    out
}
