use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{match_spans, Counts, EvalError, MatchMode};
use crate::corpus::{Document, EntityLabel};

/// Counts and derived metrics for one class, or for the micro aggregate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ClassScore {
    pub fn from_counts(c: Counts) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub per_label: BTreeMap<EntityLabel, ClassScore>,
    pub micro: ClassScore,
    /// Mean of per-label F1 over the configured label set.
    pub macro_f1: f64,
}

impl ModeReport {
    pub fn micro_f1(&self) -> f64 {
        self.micro.f1
    }

    fn from_counts(counts: &[Counts; EntityLabel::COUNT], labels: &[EntityLabel]) -> Self {
        let mut per_label = BTreeMap::new();
        let mut total = Counts::default();
        for &l in labels {
            let c = counts[l.index()];
            total.add(c);
            per_label.insert(l, ClassScore::from_counts(c));
        }
        let macro_f1 = if labels.is_empty() {
            0.0
        } else {
            per_label.values().map(|s| s.f1).sum::<f64>() / labels.len() as f64
        };
        Self {
            per_label,
            micro: ClassScore::from_counts(total),
            macro_f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub labels: Vec<EntityLabel>,
    pub exact: ModeReport,
    pub lenient: ModeReport,
}

impl MatchReport {
    pub fn mode(&self, mode: MatchMode) -> &ModeReport {
        match mode {
            MatchMode::Exact => &self.exact,
            MatchMode::Lenient => &self.lenient,
        }
    }

    /// Builds a report from raw per-label counts.
    pub fn from_counts(
        exact: &[Counts; EntityLabel::COUNT],
        lenient: &[Counts; EntityLabel::COUNT],
        labels: &[EntityLabel],
    ) -> Self {
        Self {
            labels: labels.to_vec(),
            exact: ModeReport::from_counts(exact, labels),
            lenient: ModeReport::from_counts(lenient, labels),
        }
    }

    /// Tab-separated rows: label, then exact and lenient P/R/F1 and counts.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("entity\tmode\ttp\tfp\tfn\tprecision\trecall\tf1\n");
        for mode in MatchMode::BOTH {
            let r = self.mode(mode);
            let rows = r
                .per_label
                .iter()
                .map(|(l, s)| (l.as_str().to_string(), s))
                .chain([("micro".to_string(), &r.micro)]);
            for (name, s) in rows {
                out.push_str(&format!(
                    "{name}\t{mode}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\n",
                    s.tp, s.fp, s.fn_, s.precision, s.recall, s.f1
                ));
            }
            out.push_str(&format!("macro\t{mode}\t\t\t\t\t\t{:.4}\n", r.macro_f1));
        }
        out
    }
}

/// Scores predicted documents against gold over all eight labels.
pub fn score(gold: &[Document], pred: &[Document]) -> Result<MatchReport, EvalError> {
    score_with_labels(gold, pred, &EntityLabel::ALL)
}

/// As [`score`], with macro and micro figures restricted to `labels`.
pub fn score_with_labels(
    gold: &[Document],
    pred: &[Document],
    labels: &[EntityLabel],
) -> Result<MatchReport, EvalError> {
    let gold_ids: BTreeSet<&str> = gold.iter().map(|d| d.doc_id.as_str()).collect();
    let pred_ids: BTreeSet<&str> = pred.iter().map(|d| d.doc_id.as_str()).collect();
    if gold_ids != pred_ids || gold_ids.len() != gold.len() || pred_ids.len() != pred.len() {
        return Err(EvalError::DocMismatch {
            only_gold: gold_ids.difference(&pred_ids).map(|s| s.to_string()).collect(),
            only_pred: pred_ids.difference(&gold_ids).map(|s| s.to_string()).collect(),
        });
    }
    let by_id: BTreeMap<&str, &Document> = pred.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let mut exact = [Counts::default(); EntityLabel::COUNT];
    let mut lenient = [Counts::default(); EntityLabel::COUNT];
    for g in gold {
        let p = by_id[g.doc_id.as_str()];
        for (mode, acc) in [(MatchMode::Exact, &mut exact), (MatchMode::Lenient, &mut lenient)] {
            let m = match_spans(&g.entities, &p.entities, mode);
            for (a, c) in acc.iter_mut().zip(m.per_label) {
                a.add(c);
            }
        }
    }
    Ok(MatchReport::from_counts(&exact, &lenient, labels))
}
