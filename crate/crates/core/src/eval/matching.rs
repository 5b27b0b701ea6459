use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::{EntityLabel, EntitySpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    Exact,
    Lenient,
}

impl MatchMode {
    pub const BOTH: [MatchMode; 2] = [MatchMode::Exact, MatchMode::Lenient];

    pub fn accepts(self, gold: &EntitySpan, pred: &EntitySpan) -> bool {
        gold.label == pred.label
            && match self {
                MatchMode::Exact => gold.start == pred.start && gold.end == pred.end,
                MatchMode::Lenient => pred.start < gold.end && gold.start < pred.end,
            }
    }
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchMode::Exact => "exact",
            MatchMode::Lenient => "lenient",
        })
    }
}

impl FromStr for MatchMode {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" | "strict" => Ok(MatchMode::Exact),
            "lenient" => Ok(MatchMode::Lenient),
            _ => Err(EvalError::Config(format!("unknown match mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Counts {
    pub fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanMatch {
    /// `(gold index, pred index)` into the caller's slices.
    pub pairs: Vec<(usize, usize)>,
    pub per_label: [Counts; EntityLabel::COUNT],
}

impl SpanMatch {
    pub fn total(&self) -> Counts {
        let mut c = Counts::default();
        for x in &self.per_label {
            c.add(*x);
        }
        c
    }
}

/// Indices of `spans` in `(start, end, label)` order.
pub(crate) fn sorted_order(spans: &[EntitySpan]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..spans.len()).collect();
    idx.sort_by_key(|&i| spans[i]);
    idx
}

/// One-to-one greedy matching: predictions in `(start, end)` order each take
/// the first unmatched gold, in the same order, that `accept` allows.
pub(crate) fn greedy_pairs(
    gold: &[EntitySpan],
    pred: &[EntitySpan],
    gold_free: &mut [bool],
    pred_free: &mut [bool],
    accept: impl Fn(&EntitySpan, &EntitySpan) -> bool,
) -> Vec<(usize, usize)> {
    let gold_order = sorted_order(gold);
    let mut pairs = Vec::new();
    for p in sorted_order(pred) {
        if !pred_free[p] {
            continue;
        }
        if let Some(&g) = gold_order
            .iter()
            .find(|&&g| gold_free[g] && accept(&gold[g], &pred[p]))
        {
            gold_free[g] = false;
            pred_free[p] = false;
            pairs.push((g, p));
        }
    }
    pairs
}

/// Matches the spans of one document under `mode`.
pub fn match_spans(gold: &[EntitySpan], pred: &[EntitySpan], mode: MatchMode) -> SpanMatch {
    let mut gold_free = vec![true; gold.len()];
    let mut pred_free = vec![true; pred.len()];
    let pairs = greedy_pairs(gold, pred, &mut gold_free, &mut pred_free, |g, p| {
        mode.accepts(g, p)
    });
    let mut per_label = [Counts::default(); EntityLabel::COUNT];
    for &(g, _) in &pairs {
        per_label[gold[g].label.index()].tp += 1;
    }
    for (g, free) in gold.iter().zip(&gold_free) {
        if *free {
            per_label[g.label.index()].fn_ += 1;
        }
    }
    for (p, free) in pred.iter().zip(&pred_free) {
        if *free {
            per_label[p.label.index()].fp += 1;
        }
    }
    SpanMatch { pairs, per_label }
}
