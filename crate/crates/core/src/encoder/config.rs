use serde::{Deserialize, Serialize};

use super::EncoderError;
use crate::corpus::N_TAGS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_layers: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub d_ff: usize,
    pub max_positions: usize,
    pub vocab_size: usize,
    pub n_tags: usize,
    pub dropout_rate: f64,
    pub seed: u64,
}

impl ModelConfig {
    /// Desk-scale default: 2 layers, width 64, 4 heads, feed-forward 256.
    pub fn toy(vocab_size: usize) -> Self {
        Self {
            n_layers: 2,
            d_model: 64,
            n_heads: 4,
            d_ff: 256,
            max_positions: 128,
            vocab_size,
            n_tags: N_TAGS,
            dropout_rate: 0.1,
            seed: 0,
        }
    }

    /// The configuration used for finite-difference gradient checks.
    pub fn tiny(vocab_size: usize) -> Self {
        Self {
            n_layers: 2,
            d_model: 8,
            n_heads: 2,
            d_ff: 16,
            max_positions: 16,
            vocab_size,
            n_tags: N_TAGS,
            dropout_rate: 0.0,
            seed: 0,
        }
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }

    pub fn validate(&self) -> Result<(), EncoderError> {
        let fail = |m: String| Err(EncoderError::Config(m));
        if self.d_model == 0 || self.n_heads == 0 || self.d_ff == 0 {
            return fail("d_model, n_heads and d_ff must be positive".into());
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return fail(format!(
                "d_model {} not divisible by n_heads {}",
                self.d_model, self.n_heads
            ));
        }
        if self.vocab_size == 0 || self.max_positions < 2 {
            return fail("vocab_size must be positive and max_positions at least 2".into());
        }
        if self.n_tags != N_TAGS {
            return fail(format!("n_tags must be {N_TAGS}, got {}", self.n_tags));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return fail(format!("dropout rate {} outside [0, 1)", self.dropout_rate));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_divisible_heads_rejected() {
        let mut c = ModelConfig::toy(100);
        c.n_heads = 5;
        assert!(matches!(c.validate(), Err(EncoderError::Config(_))));
        assert!(ModelConfig::toy(100).validate().is_ok());
        assert!(ModelConfig::tiny(20).validate().is_ok());
    }
}
