//! Entity-level scoring, run aggregation, error taxonomy and t-SNE.

mod aggregate;
mod errors;
mod matching;
mod report;
mod tsne;

use thiserror::Error;

pub use aggregate::{aggregate_runs, aggregate_values, f1_table, RunAggregate, RunSummary, SummaryRow};
pub use errors::{categorize_document, categorize_errors, ErrorBreakdown, ErrorCase, ErrorCategory};
pub use matching::{match_spans, Counts, MatchMode, SpanMatch};
pub use report::{score, score_with_labels, ClassScore, MatchReport, ModeReport};
pub use tsne::{joint_probabilities, tsne, write_coords, TsneConfig, TsneResult};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("document sets differ: only in gold {only_gold:?}, only in predictions {only_pred:?}")]
    DocMismatch {
        only_gold: Vec<String>,
        only_pred: Vec<String>,
    },
    #[error("{0}")]
    Empty(&'static str),
    #[error("t-SNE needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
