use ndarray::{Array, Array1, Array2, Dimension};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{EncoderError, ModelConfig};

pub const INIT_STD: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    pub wq: Array2<f64>,
    pub bq: Array1<f64>,
    pub wk: Array2<f64>,
    pub bk: Array1<f64>,
    pub wv: Array2<f64>,
    pub bv: Array1<f64>,
    pub wo: Array2<f64>,
    pub bo: Array1<f64>,
    pub ln1_g: Array1<f64>,
    pub ln1_b: Array1<f64>,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub ln2_g: Array1<f64>,
    pub ln2_b: Array1<f64>,
}

/// All trainable parameters. The masked-language-model decoder reuses
/// `tok_emb`, so there is no separate decoder matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub tok_emb: Array2<f64>,
    pub pos_emb: Array2<f64>,
    pub emb_ln_g: Array1<f64>,
    pub emb_ln_b: Array1<f64>,
    pub layers: Vec<LayerWeights>,
    pub mlm_bias: Array1<f64>,
    pub ner_w: Array2<f64>,
    pub ner_b: Array1<f64>,
}

fn view<D: Dimension>(a: &Array<f64, D>) -> &[f64] {
    a.as_slice().expect("parameters are contiguous")
}

fn view_mut<D: Dimension>(a: &mut Array<f64, D>) -> &mut [f64] {
    a.as_slice_mut().expect("parameters are contiguous")
}

/// Name, shape and data of one parameter tensor.
pub type TensorRef<'a> = (String, Vec<usize>, &'a [f64]);

impl LayerWeights {
    fn zeros(d: usize, ff: usize) -> Self {
        let m = |r, c| Array2::zeros((r, c));
        let v = |n| Array1::zeros(n);
        Self {
            wq: m(d, d),
            bq: v(d),
            wk: m(d, d),
            bk: v(d),
            wv: m(d, d),
            bv: v(d),
            wo: m(d, d),
            bo: v(d),
            ln1_g: v(d),
            ln1_b: v(d),
            w1: m(d, ff),
            b1: v(ff),
            w2: m(ff, d),
            b2: v(d),
            ln2_g: v(d),
            ln2_b: v(d),
        }
    }

    fn tensors<'a>(&'a self, i: usize, out: &mut Vec<TensorRef<'a>>) {
        let p = |n: &str| format!("layers.{i}.{n}");
        out.push((p("attention.query.weight"), self.wq.shape().to_vec(), view(&self.wq)));
        out.push((p("attention.query.bias"), self.bq.shape().to_vec(), view(&self.bq)));
        out.push((p("attention.key.weight"), self.wk.shape().to_vec(), view(&self.wk)));
        out.push((p("attention.key.bias"), self.bk.shape().to_vec(), view(&self.bk)));
        out.push((p("attention.value.weight"), self.wv.shape().to_vec(), view(&self.wv)));
        out.push((p("attention.value.bias"), self.bv.shape().to_vec(), view(&self.bv)));
        out.push((p("attention.output.weight"), self.wo.shape().to_vec(), view(&self.wo)));
        out.push((p("attention.output.bias"), self.bo.shape().to_vec(), view(&self.bo)));
        out.push((p("attention.ln.gain"), self.ln1_g.shape().to_vec(), view(&self.ln1_g)));
        out.push((p("attention.ln.bias"), self.ln1_b.shape().to_vec(), view(&self.ln1_b)));
        out.push((p("ffn.inner.weight"), self.w1.shape().to_vec(), view(&self.w1)));
        out.push((p("ffn.inner.bias"), self.b1.shape().to_vec(), view(&self.b1)));
        out.push((p("ffn.outer.weight"), self.w2.shape().to_vec(), view(&self.w2)));
        out.push((p("ffn.outer.bias"), self.b2.shape().to_vec(), view(&self.b2)));
        out.push((p("ffn.ln.gain"), self.ln2_g.shape().to_vec(), view(&self.ln2_g)));
        out.push((p("ffn.ln.bias"), self.ln2_b.shape().to_vec(), view(&self.ln2_b)));
    }

    fn tensors_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        out.push(view_mut(&mut self.wq));
        out.push(view_mut(&mut self.bq));
        out.push(view_mut(&mut self.wk));
        out.push(view_mut(&mut self.bk));
        out.push(view_mut(&mut self.wv));
        out.push(view_mut(&mut self.bv));
        out.push(view_mut(&mut self.wo));
        out.push(view_mut(&mut self.bo));
        out.push(view_mut(&mut self.ln1_g));
        out.push(view_mut(&mut self.ln1_b));
        out.push(view_mut(&mut self.w1));
        out.push(view_mut(&mut self.b1));
        out.push(view_mut(&mut self.w2));
        out.push(view_mut(&mut self.b2));
        out.push(view_mut(&mut self.ln2_g));
        out.push(view_mut(&mut self.ln2_b));
    }
}

impl Weights {
    pub fn zeros(config: &ModelConfig) -> Self {
        let d = config.d_model;
        Self {
            tok_emb: Array2::zeros((config.vocab_size, d)),
            pos_emb: Array2::zeros((config.max_positions, d)),
            emb_ln_g: Array1::zeros(d),
            emb_ln_b: Array1::zeros(d),
            layers: (0..config.n_layers)
                .map(|_| LayerWeights::zeros(d, config.d_ff))
                .collect(),
            mlm_bias: Array1::zeros(config.vocab_size),
            ner_w: Array2::zeros((d, config.n_tags)),
            ner_b: Array1::zeros(config.n_tags),
        }
    }

    /// Seeded initialization: matrices from N(0, 0.02), biases zero,
    /// layer-norm gains one.
    pub fn init(config: &ModelConfig) -> Result<Self, EncoderError> {
        config.validate()?;
        let mut w = Self::zeros(config);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let normal = Normal::new(0.0, INIT_STD).expect("valid std");
        let mut fill = |a: &mut [f64]| a.iter_mut().for_each(|x| *x = normal.sample(&mut rng));
        fill(view_mut(&mut w.tok_emb));
        fill(view_mut(&mut w.pos_emb));
        w.emb_ln_g.fill(1.0);
        for l in &mut w.layers {
            fill(view_mut(&mut l.wq));
            fill(view_mut(&mut l.wk));
            fill(view_mut(&mut l.wv));
            fill(view_mut(&mut l.wo));
            fill(view_mut(&mut l.w1));
            fill(view_mut(&mut l.w2));
            l.ln1_g.fill(1.0);
            l.ln2_g.fill(1.0);
        }
        fill(view_mut(&mut w.ner_w));
        Ok(w)
    }

    /// Every parameter tensor in a fixed canonical order.
    pub fn tensors(&self) -> Vec<TensorRef<'_>> {
        let mut out = vec![
            ("embeddings.token".to_string(), self.tok_emb.shape().to_vec(), view(&self.tok_emb)),
            ("embeddings.position".to_string(), self.pos_emb.shape().to_vec(), view(&self.pos_emb)),
            ("embeddings.ln.gain".to_string(), self.emb_ln_g.shape().to_vec(), view(&self.emb_ln_g)),
            ("embeddings.ln.bias".to_string(), self.emb_ln_b.shape().to_vec(), view(&self.emb_ln_b)),
        ];
        for (i, l) in self.layers.iter().enumerate() {
            l.tensors(i, &mut out);
        }
        out.push(("mlm.bias".to_string(), self.mlm_bias.shape().to_vec(), view(&self.mlm_bias)));
        out.push(("ner.weight".to_string(), self.ner_w.shape().to_vec(), view(&self.ner_w)));
        out.push(("ner.bias".to_string(), self.ner_b.shape().to_vec(), view(&self.ner_b)));
        out
    }

    /// Mutable views in the same order as [`Weights::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = vec![
            view_mut(&mut self.tok_emb),
            view_mut(&mut self.pos_emb),
            view_mut(&mut self.emb_ln_g),
            view_mut(&mut self.emb_ln_b),
        ];
        for l in &mut self.layers {
            l.tensors_mut(&mut out);
        }
        out.push(view_mut(&mut self.mlm_bias));
        out.push(view_mut(&mut self.ner_w));
        out.push(view_mut(&mut self.ner_b));
        out
    }

    /// The masked-language-model decoder matrix, tied to the token embeddings.
    pub fn mlm_decoder(&self) -> &Array2<f64> {
        &self.tok_emb
    }

    pub fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, _, data)| data.iter().all(|x| x.is_finite()))
    }

    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|(_, _, d)| d.len()).sum()
    }

    pub(crate) fn fill_zero(&mut self) {
        for t in self.tensors_mut() {
            t.fill(0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_follow_config() {
        let mut c = ModelConfig::toy(100);
        c.d_model = 8;
        c.n_heads = 2;
        let w = Weights::init(&c).unwrap();
        assert_eq!(w.tok_emb.shape(), &[100, 8]);
        assert_eq!(w.layers.len(), 2);
        assert_eq!(w.ner_w.shape(), &[8, 17]);
    }

    #[test]
    fn init_is_deterministic() {
        let c = ModelConfig::tiny(30);
        assert_eq!(Weights::init(&c).unwrap(), Weights::init(&c).unwrap());
        let mut other = c;
        other.seed = 1;
        assert_ne!(Weights::init(&c).unwrap(), Weights::init(&other).unwrap());
    }

    #[test]
    fn init_statistics() {
        let w = Weights::init(&ModelConfig::toy(500)).unwrap();
        let data = w.tok_emb.as_slice().unwrap();
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let std = (data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 1e-3);
        assert!((std - 0.02).abs() < 1e-3);
        assert!(w.layers[0].ln1_g.iter().all(|&g| g == 1.0));
        assert!(w.layers[0].ln1_b.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn tensor_orders_agree() {
        let mut w = Weights::init(&ModelConfig::tiny(12)).unwrap();
        let lens: Vec<usize> = w.tensors().iter().map(|(_, _, d)| d.len()).collect();
        let lens_mut: Vec<usize> = w.tensors_mut().iter().map(|d| d.len()).collect();
        assert_eq!(lens, lens_mut);
        assert_eq!(lens.len(), 4 + 2 * 16 + 3);
    }
}
