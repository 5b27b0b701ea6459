use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::model::{backward, forward_cached, mlm_head, ner_head, GradFault};
use super::{EncoderError, ModelConfig, Weights};
use crate::corpus::N_TAGS;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckOptions {
    pub epsilon: f64,
    /// Coordinates drawn per tensor; smaller tensors are checked in full.
    pub samples_per_tensor: usize,
    /// Denominator floor for the relative error, so coordinates whose true
    /// gradient is zero are judged on absolute error.
    pub floor: f64,
    pub seq_len: usize,
    pub seed: u64,
    /// Use the five-point central stencil, whose O(eps^4) truncation error
    /// allows a larger `epsilon` and so less float cancellation.
    pub fourth_order: bool,
    #[doc(hidden)]
    pub fault: GradFault,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-5,
            samples_per_tensor: 64,
            floor: 1e-5,
            seq_len: 8,
            seed: 0,
            fourth_order: false,
            fault: GradFault::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorCheck {
    pub loss: &'static str,
    pub name: String,
    pub n_checked: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub tensors: Vec<TensorCheck>,
}

impl GradCheckReport {
    pub fn worst(&self) -> Option<&TensorCheck> {
        self.tensors
            .iter()
            .max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error))
    }
}

struct Problem {
    ids: Vec<u32>,
    mask: Vec<u8>,
    mlm_positions: Vec<usize>,
    mlm_targets: Vec<usize>,
    ner_labels: Vec<Option<usize>>,
}

#[derive(Clone, Copy)]
enum Loss {
    Mlm,
    Ner,
}

fn loss_and_grad(
    w: &Weights,
    config: &ModelConfig,
    p: &Problem,
    which: Loss,
    fault: GradFault,
    grads: Option<&mut Weights>,
) -> Result<f64, EncoderError> {
    let (h, cache) = forward_cached(w, config, &p.ids, &p.mask, None)?;
    let mut scratch;
    let g = match grads {
        Some(g) => g,
        None => {
            scratch = Weights::zeros(config);
            &mut scratch
        }
    };
    let (loss, n, dh) = match which {
        Loss::Mlm => {
            let n = p.mlm_positions.len();
            let (l, _, dh) = mlm_head(w, &h, &p.mlm_positions, &p.mlm_targets, 1.0 / n as f64, g);
            (l, n, dh)
        }
        Loss::Ner => {
            let n = p.ner_labels.iter().flatten().count();
            let (l, _, dh) = ner_head(w, &h, &p.ner_labels, 1.0 / n as f64, g);
            (l, n, dh)
        }
    };
    backward(w, config, &cache, dh, g, fault);
    Ok(loss / n as f64)
}

/// Compares analytic gradients of both losses with central differences on
/// randomly perturbed weights. Dropout is forced off.
pub fn grad_check(config: &ModelConfig, opts: &GradCheckOptions) -> Result<GradCheckReport, EncoderError> {
    let mut config = *config;
    config.dropout_rate = 0.0;
    config.validate()?;
    let t = opts.seq_len.min(config.max_positions);
    if t < 3 {
        return Err(EncoderError::Config("grad check needs at least 3 positions".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    // Larger-than-init weights so attention is far from uniform.
    let mut w = Weights::init(&config)?;
    let noise = Normal::new(0.0, 0.3).expect("valid std");
    for tensor in w.tensors_mut() {
        tensor.iter_mut().for_each(|x| *x += noise.sample(&mut rng));
    }

    let v = config.vocab_size as u32;
    let mut mask = vec![1u8; t];
    mask[t - 1] = 0;
    let problem = Problem {
        ids: (0..t).map(|_| rng.gen_range(0..v)).collect(),
        mask,
        mlm_positions: vec![1, t / 2],
        mlm_targets: (0..2).map(|_| rng.gen_range(0..config.vocab_size)).collect(),
        ner_labels: (0..t)
            .map(|i| (i > 0 && i < t - 1).then(|| rng.gen_range(0..N_TAGS)))
            .collect(),
    };

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        tensors: Vec::new(),
    };
    for (which, label) in [(Loss::Mlm, "mlm"), (Loss::Ner, "ner")] {
        let mut analytic = Weights::zeros(&config);
        loss_and_grad(&w, &config, &problem, which, opts.fault, Some(&mut analytic))?;
        let names: Vec<(String, usize)> = w
            .tensors()
            .into_iter()
            .map(|(n, _, d)| (n, d.len()))
            .collect();
        let analytic_data: Vec<Vec<f64>> =
            analytic.tensors().into_iter().map(|(_, _, d)| d.to_vec()).collect();

        for (ti, (name, len)) in names.into_iter().enumerate() {
            let coords: Vec<usize> = if len <= opts.samples_per_tensor {
                (0..len).collect()
            } else {
                sample(&mut rng, len, opts.samples_per_tensor).into_vec()
            };
            let mut check = TensorCheck {
                loss: label,
                name,
                n_checked: coords.len(),
                max_rel_error: 0.0,
                max_abs_error: 0.0,
            };
            for c in coords {
                let orig = w.tensors_mut()[ti][c];
                let mut at = |dx: f64| -> Result<f64, EncoderError> {
                    w.tensors_mut()[ti][c] = orig + dx;
                    let l = loss_and_grad(&w, &config, &problem, which, opts.fault, None);
                    w.tensors_mut()[ti][c] = orig;
                    l
                };
                let e = opts.epsilon;
                let numeric = if opts.fourth_order {
                    let near = at(e)? - at(-e)?;
                    let far = at(2.0 * e)? - at(-2.0 * e)?;
                    (8.0 * near - far) / (12.0 * e)
                } else {
                    (at(e)? - at(-e)?) / (2.0 * e)
                };
                let a = analytic_data[ti][c];
                let abs = (a - numeric).abs();
                let rel = abs / a.abs().max(numeric.abs()).max(opts.floor);
                check.max_abs_error = check.max_abs_error.max(abs);
                check.max_rel_error = check.max_rel_error.max(rel);
            }
            report.max_rel_error = report.max_rel_error.max(check.max_rel_error);
            report.tensors.push(check);
        }
    }
    Ok(report)
}
