use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::matching::{greedy_pairs, sorted_order};
use super::{EvalError, MatchMode};
use crate::corpus::{Document, EntitySpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    BoundaryMismatch,
    Missing,
    TypeConfusion,
    Spurious,
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorCategory::BoundaryMismatch => "boundary_mismatch",
            ErrorCategory::Missing => "missing",
            ErrorCategory::TypeConfusion => "type_confusion",
            ErrorCategory::Spurious => "spurious",
        })
    }
}

/// One categorized error. `gold_is_error` / `pred_is_error` say which sides
/// this case accounts for: a pair covers one FN and one FP; a lone gold or a
/// lone prediction covers one. The other side, when present, is context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCase {
    pub doc_id: String,
    pub category: ErrorCategory,
    pub gold: Option<EntitySpan>,
    pub pred: Option<EntitySpan>,
    pub gold_is_error: bool,
    pub pred_is_error: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    pub boundary_mismatch: usize,
    pub missing: usize,
    pub type_confusion: usize,
    pub spurious: usize,
    pub cases: Vec<ErrorCase>,
}

impl ErrorBreakdown {
    fn push(&mut self, case: ErrorCase) {
        match case.category {
            ErrorCategory::BoundaryMismatch => self.boundary_mismatch += 1,
            ErrorCategory::Missing => self.missing += 1,
            ErrorCategory::TypeConfusion => self.type_confusion += 1,
            ErrorCategory::Spurious => self.spurious += 1,
        }
        self.cases.push(case);
    }

    /// False negatives accounted for by the cases.
    pub fn fn_accounted(&self) -> usize {
        self.cases.iter().filter(|c| c.gold_is_error).count()
    }

    pub fn fp_accounted(&self) -> usize {
        self.cases.iter().filter(|c| c.pred_is_error).count()
    }

    pub fn to_tsv(&self) -> String {
        let fmt_span = |s: &Option<EntitySpan>| match s {
            Some(s) => format!("{}\t{}\t{}", s.start, s.end, s.label.code()),
            None => "\t\t".to_string(),
        };
        let mut out = String::from(
            "doc_id\tcategory\tgold_start\tgold_end\tgold_label\tpred_start\tpred_end\tpred_label\n",
        );
        for c in &self.cases {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                c.doc_id,
                c.category,
                fmt_span(&c.gold),
                fmt_span(&c.pred)
            ));
        }
        out
    }
}

/// Categorizes the exact-match errors of one document.
///
/// Order of assignment: same-label overlapping pairs are boundary
/// mismatches; then different-label overlapping pairs are type confusions;
/// a leftover gold is a boundary or type error against the first prediction
/// it overlaps, else missing; a leftover prediction likewise against the
/// first gold it overlaps, else spurious.
pub fn categorize_document(doc_id: &str, gold: &[EntitySpan], pred: &[EntitySpan], out: &mut ErrorBreakdown) {
    let mut gold_free = vec![true; gold.len()];
    let mut pred_free = vec![true; pred.len()];
    greedy_pairs(gold, pred, &mut gold_free, &mut pred_free, |g, p| {
        MatchMode::Exact.accepts(g, p)
    });
    let pair = |category, g: usize, p: usize| ErrorCase {
        doc_id: doc_id.to_string(),
        category,
        gold: Some(gold[g]),
        pred: Some(pred[p]),
        gold_is_error: true,
        pred_is_error: true,
    };
    for (g, p) in greedy_pairs(gold, pred, &mut gold_free, &mut pred_free, |g, p| {
        MatchMode::Lenient.accepts(g, p)
    }) {
        out.push(pair(ErrorCategory::BoundaryMismatch, g, p));
    }
    for (g, p) in greedy_pairs(gold, pred, &mut gold_free, &mut pred_free, |g, p| {
        g.overlaps(p) && g.label != p.label
    }) {
        out.push(pair(ErrorCategory::TypeConfusion, g, p));
    }

    let relation = |g: &EntitySpan, p: &EntitySpan| {
        if g.label == p.label {
            ErrorCategory::BoundaryMismatch
        } else {
            ErrorCategory::TypeConfusion
        }
    };
    let pred_order = sorted_order(pred);
    for g in sorted_order(gold).into_iter().filter(|&g| gold_free[g]) {
        let hit = pred_order.iter().find(|&&p| gold[g].overlaps(&pred[p]));
        out.push(ErrorCase {
            doc_id: doc_id.to_string(),
            category: hit.map_or(ErrorCategory::Missing, |&p| relation(&gold[g], &pred[p])),
            gold: Some(gold[g]),
            pred: hit.map(|&p| pred[p]),
            gold_is_error: true,
            pred_is_error: false,
        });
    }
    let gold_order = sorted_order(gold);
    for p in pred_order.into_iter().filter(|&p| pred_free[p]) {
        let hit = gold_order.iter().find(|&&g| gold[g].overlaps(&pred[p]));
        out.push(ErrorCase {
            doc_id: doc_id.to_string(),
            category: hit.map_or(ErrorCategory::Spurious, |&g| relation(&gold[g], &pred[p])),
            gold: hit.map(|&g| gold[g]),
            pred: Some(pred[p]),
            gold_is_error: false,
            pred_is_error: true,
        });
    }
}

/// Error taxonomy over matching documents of two corpora.
pub fn categorize_errors(gold: &[Document], pred: &[Document]) -> Result<ErrorBreakdown, EvalError> {
    let by_id: BTreeMap<&str, &Document> = pred.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let only_gold: Vec<String> = gold
        .iter()
        .filter(|d| !by_id.contains_key(d.doc_id.as_str()))
        .map(|d| d.doc_id.clone())
        .collect();
    let gold_ids: std::collections::BTreeSet<&str> = gold.iter().map(|d| d.doc_id.as_str()).collect();
    let only_pred: Vec<String> = pred
        .iter()
        .filter(|d| !gold_ids.contains(d.doc_id.as_str()))
        .map(|d| d.doc_id.clone())
        .collect();
    if !only_gold.is_empty() || !only_pred.is_empty() {
        return Err(EvalError::DocMismatch { only_gold, only_pred });
    }
    let mut out = ErrorBreakdown::default();
    for g in gold {
        categorize_document(&g.doc_id, &g.entities, &by_id[g.doc_id.as_str()].entities, &mut out);
    }
    Ok(out)
}
