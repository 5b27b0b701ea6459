//! A small transformer encoder written against `ndarray`, trained with
//! hand-derived gradients in double precision.

mod checkpoint;
mod config;
mod gradcheck;
mod model;
mod resize;
mod train;
mod weights;

use thiserror::Error;

pub use checkpoint::{
    load_checkpoint, save_checkpoint, write_loss_csv, Checkpoint, OptimizerInfo, TensorInfo,
};
pub use config::ModelConfig;
pub use gradcheck::{grad_check, GradCheckOptions, GradCheckReport, TensorCheck};
#[doc(hidden)]
pub use model::GradFault;
pub use model::{forward, forward_batch};
pub use resize::{export_embeddings, resize_for_vocab, EmbeddingExport, InitPolicy};
pub use train::{
    finetune_ner, mlm_accuracy, predict, predict_tags, pretrain_mlm, AdamConfig, MaskingConfig,
    NerDataset, NerExample, NerHyper, PretrainConfig, TrainRecord,
};
pub use weights::{LayerWeights, TensorRef, Weights, INIT_STD};

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("sequence of length {len} exceeds max_positions {max}")]
    SequenceTooLong { len: usize, max: usize },
    #[error("non-finite loss at step {step}")]
    NonFiniteLoss { step: usize },
    #[error("vocabulary digest mismatch: checkpoint {checkpoint}, data {data}")]
    VocabMismatch { checkpoint: String, data: String },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    Format(String),
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}
