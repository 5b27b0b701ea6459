use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EncoderError, ModelConfig, TrainRecord, Weights};
use crate::tokenizer::Vocabulary;

const MAGIC: &[u8; 8] = b"ONCKPT01";

/// Optimizer settings as recorded alongside trained weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerInfo {
    pub name: String,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub clip_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
    /// Offset into the data section, in f64 elements.
    pub offset: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    vocab_digest: String,
    step: u64,
    optimizer: Option<OptimizerInfo>,
    tensors: Vec<TensorInfo>,
}

/// Weights plus the metadata needed to use them safely.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub weights: Weights,
    pub vocab_digest: String,
    pub step: u64,
    pub optimizer: Option<OptimizerInfo>,
}

impl Checkpoint {
    /// Fresh seeded weights for `config`, bound to `vocab`.
    pub fn init(config: ModelConfig, vocab: &Vocabulary) -> Result<Self, EncoderError> {
        if vocab.len() != config.vocab_size {
            return Err(EncoderError::SizeMismatch(format!(
                "config vocab_size {} but vocabulary has {} tokens",
                config.vocab_size,
                vocab.len()
            )));
        }
        Ok(Self {
            weights: Weights::init(&config)?,
            config,
            vocab_digest: vocab.digest(),
            step: 0,
            optimizer: None,
        })
    }

    pub fn check_vocab(&self, vocab: &Vocabulary) -> Result<(), EncoderError> {
        let digest = vocab.digest();
        if digest != self.vocab_digest {
            return Err(EncoderError::VocabMismatch {
                checkpoint: self.vocab_digest.clone(),
                data: digest,
            });
        }
        Ok(())
    }

    pub fn tensor_index(&self) -> Vec<TensorInfo> {
        let mut offset = 0;
        self.weights
            .tensors()
            .into_iter()
            .map(|(name, shape, data)| {
                let info = TensorInfo {
                    name,
                    shape,
                    offset,
                };
                offset += data.len();
                info
            })
            .collect()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), EncoderError> {
        let header = Header {
            config: self.config,
            vocab_digest: self.vocab_digest.clone(),
            step: self.step,
            optimizer: self.optimizer.clone(),
            tensors: self.tensor_index(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| EncoderError::Format(e.to_string()))?;
        w.write_all(MAGIC)?;
        w.write_all(&(json.len() as u64).to_le_bytes())?;
        w.write_all(&json)?;
        for (_, _, data) in self.weights.tensors() {
            for v in data {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, EncoderError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(EncoderError::Format("bad magic".into()));
        }
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let len = u64::from_le_bytes(len) as usize;
        let mut json = vec![0u8; len];
        r.read_exact(&mut json)?;
        let header: Header =
            serde_json::from_slice(&json).map_err(|e| EncoderError::Format(e.to_string()))?;
        header.config.validate()?;

        let mut ckpt = Checkpoint {
            config: header.config,
            weights: Weights::zeros(&header.config),
            vocab_digest: header.vocab_digest,
            step: header.step,
            optimizer: header.optimizer,
        };
        let expected = ckpt.tensor_index();
        if expected != header.tensors {
            return Err(EncoderError::Format(
                "tensor index does not match the configuration".into(),
            ));
        }
        let mut buf = [0u8; 8];
        for t in ckpt.weights.tensors_mut() {
            for v in t.iter_mut() {
                r.read_exact(&mut buf)?;
                *v = f64::from_le_bytes(buf);
            }
        }
        if !ckpt.weights.all_finite() {
            return Err(EncoderError::Format("non-finite weight".into()));
        }
        Ok(ckpt)
    }
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<(), EncoderError> {
    ckpt.write_to(BufWriter::new(File::create(path)?))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint, EncoderError> {
    Checkpoint::read_from(BufReader::new(File::open(path)?))
}

/// `step,loss,accuracy` rows with a header line.
pub fn write_loss_csv<W: Write>(mut w: W, records: &[TrainRecord]) -> std::io::Result<()> {
    writeln!(w, "step,loss,accuracy")?;
    for r in records {
        writeln!(w, "{},{},{}", r.step, r.loss, r.accuracy)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(n: usize) -> Vocabulary {
        let mut toks: Vec<String> = crate::tokenizer::SPECIAL_TOKENS.iter().map(|s| s.to_string()).collect();
        toks.extend((toks.len()..n).map(|i| format!("w{i}")));
        Vocabulary::from_tokens(toks).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let v = vocab(20);
        let mut c = Checkpoint::init(ModelConfig::tiny(20), &v).unwrap();
        c.step = 7;
        let mut buf = Vec::new();
        c.write_to(&mut buf).unwrap();
        let back = Checkpoint::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn truncated_and_corrupt_files_rejected() {
        let v = vocab(20);
        let c = Checkpoint::init(ModelConfig::tiny(20), &v).unwrap();
        let mut buf = Vec::new();
        c.write_to(&mut buf).unwrap();
        assert!(Checkpoint::read_from(&buf[..buf.len() - 3]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(Checkpoint::read_from(bad.as_slice()), Err(EncoderError::Format(_))));
    }

    #[test]
    fn vocab_size_must_match() {
        assert!(Checkpoint::init(ModelConfig::tiny(21), &vocab(20)).is_err());
    }

    #[test]
    fn loss_csv_layout() {
        let mut out = Vec::new();
        let recs = [TrainRecord { step: 1, loss: 2.5, accuracy: 0.25 }];
        write_loss_csv(&mut out, &recs).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "step,loss,accuracy\n1,2.5,0.25\n");
    }
}
