use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// The eight breast-cancer phenotype classes.
///
/// Serialized names are stable; they appear in corpus files, CoNLL exports
/// and report tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityLabel {
    HormoneReceptorType,
    HormoneReceptorStatus,
    TumorSize,
    TumorSite,
    CancerGrade,
    HistologicalType,
    CancerLaterality,
    CancerStage,
}

impl EntityLabel {
    pub const ALL: [EntityLabel; 8] = [
        EntityLabel::HormoneReceptorType,
        EntityLabel::HormoneReceptorStatus,
        EntityLabel::TumorSize,
        EntityLabel::TumorSite,
        EntityLabel::CancerGrade,
        EntityLabel::HistologicalType,
        EntityLabel::CancerLaterality,
        EntityLabel::CancerStage,
    ];

    pub const COUNT: usize = 8;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<Self> {
        Self::ALL.get(idx).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EntityLabel::HormoneReceptorType => "HormoneReceptorType",
            EntityLabel::HormoneReceptorStatus => "HormoneReceptorStatus",
            EntityLabel::TumorSize => "TumorSize",
            EntityLabel::TumorSite => "TumorSite",
            EntityLabel::CancerGrade => "CancerGrade",
            EntityLabel::HistologicalType => "HistologicalType",
            EntityLabel::CancerLaterality => "CancerLaterality",
            EntityLabel::CancerStage => "CancerStage",
        }
    }

    /// Human-readable row name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            EntityLabel::HormoneReceptorType => "Hormone receptor type",
            EntityLabel::HormoneReceptorStatus => "Hormone receptor status",
            EntityLabel::TumorSize => "Tumor size",
            EntityLabel::TumorSite => "Tumor site",
            EntityLabel::CancerGrade => "Cancer grade",
            EntityLabel::HistologicalType => "Histological type",
            EntityLabel::CancerLaterality => "Cancer laterality",
            EntityLabel::CancerStage => "Cancer stage",
        }
    }

    /// Short code used in BIO tag strings, e.g. `B-HRT`.
    pub fn code(self) -> &'static str {
        match self {
            EntityLabel::HormoneReceptorType => "HRT",
            EntityLabel::HormoneReceptorStatus => "HRS",
            EntityLabel::TumorSize => "TSZ",
            EntityLabel::TumorSite => "TST",
            EntityLabel::CancerGrade => "GRD",
            EntityLabel::HistologicalType => "HIS",
            EntityLabel::CancerLaterality => "LAT",
            EntityLabel::CancerStage => "STG",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.code() == code)
    }
}

impl fmt::Display for EntityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityLabel {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str() == s || l.code() == s)
            .ok_or_else(|| CorpusError::UnknownLabel(s.to_string()))
    }
}
