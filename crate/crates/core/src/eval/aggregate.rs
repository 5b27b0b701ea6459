use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{EvalError, MatchMode, MatchReport};
use crate::corpus::EntityLabel;

/// Mean and t-based confidence interval of one metric over runs. With a
/// single run only the mean is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    pub n_runs: usize,
    pub mean: f64,
    pub stdev: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub confidence: f64,
}

/// Sorted before summing so the result does not depend on input order.
pub fn aggregate_values(values: &[f64], confidence: f64) -> Result<RunAggregate, EvalError> {
    if values.is_empty() {
        return Err(EvalError::Empty("no runs to aggregate"));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(EvalError::Config(format!("confidence {confidence} outside (0, 1)")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    // Identical runs give an exact mean and a zero-width interval.
    let mean = if v[0] == v[n - 1] {
        v[0]
    } else {
        v.iter().sum::<f64>() / n as f64
    };
    if n == 1 {
        return Ok(RunAggregate {
            n_runs: 1,
            mean,
            stdev: None,
            ci_low: None,
            ci_high: None,
            confidence,
        });
    }
    let mut sq: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
    sq.sort_by(f64::total_cmp);
    let s = (sq.iter().sum::<f64>() / (n - 1) as f64).sqrt();
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .map_err(|e| EvalError::Config(e.to_string()))?
        .inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let half = t * s / (n as f64).sqrt();
    Ok(RunAggregate {
        n_runs: n,
        mean,
        stdev: Some(s),
        ci_low: Some(mean - half),
        ci_high: Some(mean + half),
        confidence,
    })
}

/// Row of a per-label F1 summary. Serialized as the label code, `macro`
/// or `micro` so it can key a JSON object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SummaryRow {
    Label(EntityLabel),
    Macro,
    Micro,
}

impl SummaryRow {
    pub fn name(self) -> &'static str {
        match self {
            SummaryRow::Label(l) => l.display_name(),
            SummaryRow::Macro => "Macro average",
            SummaryRow::Micro => "Micro average",
        }
    }
}

impl From<SummaryRow> for String {
    fn from(r: SummaryRow) -> String {
        match r {
            SummaryRow::Label(l) => l.code().to_string(),
            SummaryRow::Macro => "macro".into(),
            SummaryRow::Micro => "micro".into(),
        }
    }
}

impl TryFrom<String> for SummaryRow {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        match s.as_str() {
            "macro" => Ok(SummaryRow::Macro),
            "micro" => Ok(SummaryRow::Micro),
            code => EntityLabel::from_code(code)
                .map(SummaryRow::Label)
                .ok_or_else(|| format!("unknown summary row {code:?}")),
        }
    }
}

/// F1 aggregates per row and mode over several runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n_runs: usize,
    pub confidence: f64,
    pub rows: Vec<SummaryRow>,
    pub exact: BTreeMap<SummaryRow, RunAggregate>,
    pub lenient: BTreeMap<SummaryRow, RunAggregate>,
}

impl RunSummary {
    pub fn mode(&self, mode: MatchMode) -> &BTreeMap<SummaryRow, RunAggregate> {
        match mode {
            MatchMode::Exact => &self.exact,
            MatchMode::Lenient => &self.lenient,
        }
    }
}

fn row_value(r: &MatchReport, mode: MatchMode, row: SummaryRow) -> f64 {
    let m = r.mode(mode);
    match row {
        SummaryRow::Label(l) => m.per_label.get(&l).map_or(0.0, |s| s.f1),
        SummaryRow::Macro => m.macro_f1,
        SummaryRow::Micro => m.micro.f1,
    }
}

/// Aggregates per-label, macro and micro F1 across reports.
pub fn aggregate_runs(reports: &[MatchReport], confidence: f64) -> Result<RunSummary, EvalError> {
    let first = reports.first().ok_or(EvalError::Empty("no runs to aggregate"))?;
    if reports.iter().any(|r| r.labels != first.labels) {
        return Err(EvalError::Config("reports use different label sets".into()));
    }
    let rows: Vec<SummaryRow> = first
        .labels
        .iter()
        .map(|&l| SummaryRow::Label(l))
        .chain([SummaryRow::Macro, SummaryRow::Micro])
        .collect();
    let mut out = RunSummary {
        n_runs: reports.len(),
        confidence,
        rows: rows.clone(),
        exact: BTreeMap::new(),
        lenient: BTreeMap::new(),
    };
    for mode in MatchMode::BOTH {
        for &row in &rows {
            let values: Vec<f64> = reports.iter().map(|r| row_value(r, mode, row)).collect();
            let agg = aggregate_values(&values, confidence)?;
            match mode {
                MatchMode::Exact => out.exact.insert(row, agg),
                MatchMode::Lenient => out.lenient.insert(row, agg),
            };
        }
    }
    Ok(out)
}

fn cell(exact: &RunAggregate, lenient: &RunAggregate) -> String {
    let ci = match (exact.ci_low, exact.ci_high) {
        (Some(lo), Some(hi)) => format!(" [{lo:.3}-{hi:.3}]"),
        _ => String::new(),
    };
    format!("{:.3}{ci} ({:.3})", exact.mean, lenient.mean)
}

/// Entities down the side, one column per model; each cell is the exact mean
/// F1 with its CI, lenient mean in parentheses.
pub fn f1_table(columns: &[(&str, &RunSummary)]) -> Result<String, EvalError> {
    let Some((_, first)) = columns.first() else {
        return Err(EvalError::Empty("no columns"));
    };
    if columns.iter().any(|(_, s)| s.rows != first.rows) {
        return Err(EvalError::Config("columns use different label sets".into()));
    }
    let mut out = String::from("Entity");
    for (name, _) in columns {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    for row in &first.rows {
        out.push_str(row.name());
        for (_, s) in columns {
            out.push('\t');
            out.push_str(&cell(&s.exact[row], &s.lenient[row]));
        }
        out.push('\n');
    }
    Ok(out)
}
