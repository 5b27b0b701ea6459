//! Seeded generator of report-style documents with gold phenotype spans.
//!
//! Every entity-bearing sentence carries exactly one slot, so the label
//! histogram of a large corpus tracks the per-label sampling weights.

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Document, EntityLabel, EntitySpan};

/// Phrases and sentence templates for one label.
///
/// Templates contain a single `{}` slot. In both phrases and templates `#`
/// expands to a random digit (1-9) and `@` to a clock hour (1-12).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelInventory {
    pub label: EntityLabel,
    pub weight: f64,
    pub phrases: Vec<String>,
    pub templates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseInventory {
    pub labels: Vec<LabelInventory>,
    pub fillers: Vec<String>,
    /// Inclusive range of entity sentences per document.
    pub entity_sentences: (usize, usize),
    /// Inclusive range of filler sentences per document.
    pub filler_sentences: (usize, usize),
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for PhraseInventory {
    fn default() -> Self {
        use EntityLabel::*;
        // weights follow the annotated mention counts per class
        let labels = vec![
            LabelInventory {
                label: HormoneReceptorType,
                weight: 1673.0,
                phrases: strings(&[
                    "her2", "estrogen receptor", "progesterone receptor", "er", "pr",
                    "her2 gene", "estrogen", "progesterone",
                ]),
                templates: strings(&[
                    "{} testing was performed on the specimen.",
                    "Immunostain for {} was performed.",
                    "The {} assay was repeated.",
                    "Results for {} are reported below.",
                ]),
            },
            LabelInventory {
                label: HormoneReceptorStatus,
                weight: 436.0,
                phrases: strings(&[
                    "positive", "negative", "er-positive", "er-negative", "pr-negative",
                    "receptor-positive", "equivocal", "amplified", "nonamplified",
                    "weakly positive", "strongly positive",
                ]),
                templates: strings(&[
                    "The staining result is {}.",
                    "Receptor status: {} (#0%, strong staining).",
                    "Tumor cells are {} on staining.",
                    "Final interpretation: {}.",
                ]),
            },
            LabelInventory {
                label: TumorSize,
                weight: 540.0,
                phrases: strings(&[
                    "#.# x #.# x #.# cm", "#.# cm", "# mm", "#.# cm in greatest dimension",
                    "# cm in length and # cm in width", "#.# x #.# cm",
                ]),
                templates: strings(&[
                    "Tumor size: {}.",
                    "The tumor measures {}.",
                    "Size of invasive focus: {}.",
                ]),
            },
            LabelInventory {
                label: TumorSite,
                weight: 329.0,
                phrases: strings(&[
                    "@ o'clock position", "@ o'clock", "upper outer quadrant",
                    "lower inner quadrant", "upper inner quadrant", "lower outer quadrant",
                    "retroareolar region", "subareolar region", "central portion",
                    "# cm from the nipple", "axillary tail",
                ]),
                templates: strings(&[
                    "Tumor is at {}.",
                    "The mass is located at the {}.",
                    "Biopsy site: {}.",
                ]),
            },
            LabelInventory {
                label: CancerGrade,
                weight: 271.0,
                phrases: strings(&[
                    "1 of 3", "2 of 3", "3 of 3", "grade 1", "grade 2", "grade 3",
                    "nottingham grade 2", "nottingham grade 3", "high grade",
                    "intermediate grade", "low grade", "2", "3",
                ]),
                templates: strings(&[
                    "Histologic grade: {}.",
                    "Sample shows {} lesions.",
                    "Overall grade: {}.",
                ]),
            },
            LabelInventory {
                label: HistologicalType,
                weight: 1070.0,
                phrases: strings(&[
                    "ductal carcinoma in situ", "dcis", "lcis", "lobular carcinoma in situ",
                    "invasive ductal carcinoma", "invasive lobular carcinoma",
                    "adenocarcinoma", "lobular", "idc", "ilc", "mucinous carcinoma",
                    "tubular carcinoma",
                ]),
                templates: strings(&[
                    "Histologic type: {}.",
                    "Diagnosis: {}.",
                    "Findings are consistent with {}.",
                ]),
            },
            LabelInventory {
                label: CancerLaterality,
                weight: 1192.0,
                phrases: strings(&[
                    "right", "left", "left-sided", "right-sided", "b-left", "bilateral",
                ]),
                templates: strings(&[
                    "Specimen laterality: {} breast.",
                    "Laterality: {}.",
                    "{} breast, needle core biopsy.",
                    "Mass in the {} breast.",
                ]),
            },
            LabelInventory {
                label: CancerStage,
                weight: 173.0,
                phrases: strings(&[
                    "pt4 nx mx", "pt1c", "pn1a", "ptis", "n2a", "t1c", "pt2 n0 mx",
                    "pt1b n1a m0", "pt3 n2a mx", "ypt1c", "pt1a", "pn0", "stage iia",
                    "stage iiib", "pt2", "t2 n1 m0", "m0", "mx", "nx",
                ]),
                templates: strings(&[
                    "Pathologic stage is {}.",
                    "AJCC stage: {}.",
                    "Staging: {}.",
                ]),
            },
        ];
        Self {
            labels,
            fillers: strings(&[
                "The patient tolerated the procedure well.",
                "Clinical history: abnormal screening mammogram.",
                "Margins are free of tumor.",
                "No lymphovascular invasion is identified.",
                "The specimen is received in formalin.",
                "Electronically signed by the pathologist.",
                "The patient will follow up in clinic in # weeks.",
                "Sections were examined and representative blocks submitted.",
                "Lymph nodes: 0 of # involved.",
                "Microcalcifications are present.",
                "The patient is a #0 year old woman.",
                "Discussed with the patient and her family.",
            ]),
            entity_sentences: (6, 10),
            filler_sentences: (2, 5),
        }
    }
}

impl PhraseInventory {
    pub fn validate(&self) -> Result<(), CorpusError> {
        for label in EntityLabel::ALL {
            let Some(inv) = self.labels.iter().find(|l| l.label == label) else {
                return Err(CorpusError::Config(format!("no inventory for {label}")));
            };
            if inv.phrases.is_empty() || inv.templates.is_empty() {
                return Err(CorpusError::Config(format!("empty inventory for {label}")));
            }
            if !(inv.weight.is_finite() && inv.weight > 0.0) {
                return Err(CorpusError::Config(format!("non-positive weight for {label}")));
            }
            if let Some(t) = inv.templates.iter().find(|t| t.matches("{}").count() != 1) {
                return Err(CorpusError::Config(format!(
                    "template {t:?} for {label} must contain exactly one slot"
                )));
            }
        }
        if self.entity_sentences.0 > self.entity_sentences.1
            || self.filler_sentences.0 > self.filler_sentences.1
        {
            return Err(CorpusError::Config("inverted sentence-count range".into()));
        }
        Ok(())
    }

    /// Normalized sampling weight per label, in `EntityLabel::ALL` order.
    pub fn label_weights(&self) -> [f64; EntityLabel::COUNT] {
        let mut w = [0.0; EntityLabel::COUNT];
        for inv in &self.labels {
            w[inv.label.index()] += inv.weight;
        }
        let total: f64 = w.iter().sum();
        w.map(|x| x / total)
    }
}

fn expand_pattern(pattern: &str, rng: &mut ChaCha8Rng) -> String {
    let mut out = String::with_capacity(pattern.len());
    for c in pattern.chars() {
        match c {
            '#' => out.push_str(&rng.gen_range(1..=9).to_string()),
            '@' => out.push_str(&rng.gen_range(1..=12).to_string()),
            _ => out.push(c),
        }
    }
    out
}

fn apply_case(phrase: &str, rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..10) {
        0..=1 => phrase.to_uppercase(),
        2..=4 => {
            let mut chars = phrase.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect(),
                None => String::new(),
            }
        }
        _ => phrase.to_string(),
    }
}

/// Generates `n_docs` documents; a pure function of its arguments.
pub fn generate_synthetic(
    seed: u64,
    n_docs: usize,
    inventory: &PhraseInventory,
) -> Result<Vec<Document>, CorpusError> {
    inventory.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = WeightedIndex::new(inventory.labels.iter().map(|l| l.weight))
        .map_err(|e| CorpusError::Config(e.to_string()))?;

    let mut docs = Vec::with_capacity(n_docs);
    for d in 0..n_docs {
        // (is_entity, inventory index)
        let n_ent = rng.gen_range(inventory.entity_sentences.0..=inventory.entity_sentences.1);
        let n_fill = if inventory.fillers.is_empty() {
            0
        } else {
            rng.gen_range(inventory.filler_sentences.0..=inventory.filler_sentences.1)
        };
        let mut plan: Vec<Option<usize>> = (0..n_ent).map(|_| Some(weights.sample(&mut rng))).collect();
        plan.extend(std::iter::repeat_n(None, n_fill));
        plan.shuffle(&mut rng);

        let mut text = String::new();
        let mut len = 0usize;
        let mut entities = Vec::new();
        for (s, item) in plan.into_iter().enumerate() {
            if s > 0 {
                let sep = if rng.gen_bool(0.3) { "\n" } else { " " };
                text.push_str(sep);
                len += 1;
            }
            match item {
                None => {
                    let filler = inventory.fillers.choose(&mut rng).expect("non-empty");
                    let sentence = expand_pattern(filler, &mut rng);
                    len += sentence.chars().count();
                    text.push_str(&sentence);
                }
                Some(idx) => {
                    let inv = &inventory.labels[idx];
                    let template = inv.templates.choose(&mut rng).expect("validated");
                    let phrase = inv.phrases.choose(&mut rng).expect("validated");
                    let (prefix, suffix) = template.split_once("{}").expect("validated");
                    let prefix = expand_pattern(prefix, &mut rng);
                    let mut phrase = apply_case(&expand_pattern(phrase, &mut rng), &mut rng);
                    if prefix.is_empty() {
                        let mut chars = phrase.chars();
                        if let Some(first) = chars.next() {
                            phrase = first.to_uppercase().chain(chars).collect();
                        }
                    }
                    let suffix = expand_pattern(suffix, &mut rng);
                    let start = len + prefix.chars().count();
                    let end = start + phrase.chars().count();
                    entities.push(EntitySpan::new(start, end, inv.label));
                    for part in [&prefix, &phrase, &suffix] {
                        len += part.chars().count();
                        text.push_str(part);
                    }
                }
            }
        }
        docs.push(Document::new(format!("synth-{seed}-{d:04}"), text, entities)?);
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let inv = PhraseInventory::default();
        let a = generate_synthetic(1, 10, &inv).unwrap();
        let b = generate_synthetic(1, 10, &inv).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(2, 10, &inv).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn spans_slice_inserted_phrases() {
        let inv = PhraseInventory::default();
        for doc in generate_synthetic(7, 50, &inv).unwrap() {
            for span in &doc.entities {
                let text = doc.span_text(span).to_lowercase();
                let inv = inv.labels.iter().find(|l| l.label == span.label).unwrap();
                let matches = inv.phrases.iter().any(|p| {
                    p.len() == text.len()
                        && p.chars().zip(text.chars()).all(|(pc, tc)| match pc {
                            '#' | '@' => tc.is_ascii_digit(),
                            _ => pc == tc,
                        })
                });
                // clock hours 10-12 make "@" two characters wide
                let clock = text.contains("o'clock");
                assert!(matches || clock, "{text:?} not from inventory of {}", span.label);
            }
        }
    }

    #[test]
    fn empty_class_is_config_error() {
        let mut inv = PhraseInventory::default();
        inv.labels[3].phrases.clear();
        assert!(matches!(
            generate_synthetic(1, 1, &inv),
            Err(CorpusError::Config(_))
        ));
        let mut inv = PhraseInventory::default();
        inv.labels.retain(|l| l.label != EntityLabel::CancerStage);
        assert!(generate_synthetic(1, 1, &inv).is_err());
    }

    #[test]
    fn contains_terms_missing_from_stock_vocab() {
        let vocab = crate::tokenizer::Vocabulary::builtin_base();
        let docs = generate_synthetic(1, 50, &PhraseInventory::default()).unwrap();
        let words: std::collections::HashSet<String> = docs
            .iter()
            .flat_map(|d| crate::tokenizer::basic_tokenize(&d.text))
            .map(|w| w.text)
            .collect();
        for term in ["her2", "dcis"] {
            assert!(words.contains(term), "{term}");
            assert!(!vocab.contains(term));
        }
        assert!(words.iter().any(|w| w.starts_with("pt") && !vocab.contains(w)));
    }
}
