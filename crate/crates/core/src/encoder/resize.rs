use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Checkpoint, EncoderError, INIT_STD};
use crate::tokenizer::{tokenize, Vocabulary};

/// How a rewritten placeholder row is initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitPolicy {
    /// Mean of the rows of the word's pieces under the old vocabulary.
    #[default]
    SubwordMean,
    /// Keep whatever the placeholder row held.
    KeepSlotRow,
    Random,
}

impl fmt::Display for InitPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitPolicy::SubwordMean => "subword-mean",
            InitPolicy::KeepSlotRow => "keep-slot-row",
            InitPolicy::Random => "random",
        })
    }
}

impl FromStr for InitPolicy {
    type Err = EncoderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "subword-mean" => Ok(InitPolicy::SubwordMean),
            "keep-slot-row" => Ok(InitPolicy::KeepSlotRow),
            "random" => Ok(InitPolicy::Random),
            _ => Err(EncoderError::Config(format!("unknown init policy {s:?}"))),
        }
    }
}

/// Piece ids of `word` under `vocab`, or `None` if any piece is `[UNK]`.
fn decompose(word: &str, vocab: &Vocabulary) -> Option<Vec<u32>> {
    let t = tokenize(word, vocab);
    if t.is_empty() || t.ids.contains(&vocab.unk_id()) {
        None
    } else {
        Some(t.ids)
    }
}

/// Re-targets a checkpoint from `old` to `new`, a vocabulary of the same
/// size differing only in rewritten slots. Rows of unchanged tokens are left
/// bit-for-bit alone. The MLM output bias of a rewritten slot follows the
/// same policy as its embedding row (zero under `Random`).
pub fn resize_for_vocab(
    ckpt: &Checkpoint,
    old: &Vocabulary,
    new: &Vocabulary,
    policy: InitPolicy,
    seed: u64,
) -> Result<Checkpoint, EncoderError> {
    if old.len() != new.len() {
        return Err(EncoderError::SizeMismatch(format!(
            "old vocabulary has {} tokens, new has {}; only slot replacement is supported",
            old.len(),
            new.len()
        )));
    }
    ckpt.check_vocab(old)?;
    let mut out = ckpt.clone();
    out.vocab_digest = new.digest();

    let normal = Normal::new(0.0, INIT_STD).expect("valid std");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for id in 0..new.len() as u32 {
        let word = new.token(id).unwrap_or_default();
        if old.token(id) == Some(word) {
            continue;
        }
        let pieces = match policy {
            InitPolicy::KeepSlotRow => continue,
            InitPolicy::SubwordMean => decompose(word, old),
            InitPolicy::Random => None,
        };
        let (row, bias) = match pieces {
            Some(ids) => {
                let mut row = Array1::zeros(ckpt.config.d_model);
                let mut bias = 0.0;
                for &p in &ids {
                    row += &ckpt.weights.tok_emb.row(p as usize);
                    bias += ckpt.weights.mlm_bias[p as usize];
                }
                let n = ids.len() as f64;
                (row / n, bias / n)
            }
            None => (
                Array1::from_shape_fn(ckpt.config.d_model, |_| normal.sample(&mut rng)),
                0.0,
            ),
        };
        out.weights.tok_emb.row_mut(id as usize).assign(&row);
        out.weights.mlm_bias[id as usize] = bias;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingExport {
    pub labels: Vec<String>,
    pub matrix: Array2<f64>,
}

/// One row per input token: its own embedding when it is a vocabulary
/// entry, else the mean of its piece rows.
pub fn export_embeddings(ckpt: &Checkpoint, vocab: &Vocabulary, tokens: &[String]) -> EmbeddingExport {
    let d = ckpt.config.d_model;
    let e = &ckpt.weights.tok_emb;
    let mut matrix = Array2::zeros((tokens.len(), d));
    for (r, tok) in tokens.iter().enumerate() {
        let ids = match vocab.id(tok) {
            Some(id) => vec![id],
            None => tokenize(tok, vocab).ids,
        };
        if ids.is_empty() {
            continue;
        }
        let mut row = matrix.row_mut(r);
        for &id in &ids {
            row += &e.row(id as usize);
        }
        row /= ids.len() as f64;
    }
    EmbeddingExport {
        labels: tokens.to_vec(),
        matrix,
    }
}
