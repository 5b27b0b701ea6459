use ndarray::Axis;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{backward, forward_cached, mlm_head, ner_head, ner_logits, GradFault};
use super::{Checkpoint, EncoderError, OptimizerInfo, Weights};
use crate::corpus::{
    char_slice, decode_bio, encode_bio, split_sentences, AlignmentPolicy, Document, EntitySpan,
    Tag,
};
use crate::tokenizer::{is_placeholder, tokenize, TokenizedText, Vocabulary, DEFAULT_MAX_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub step: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Global gradient-norm clip; 0 disables clipping.
    pub clip_norm: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            clip_norm: 1.0,
        }
    }
}

impl AdamConfig {
    fn info(&self) -> OptimizerInfo {
        OptimizerInfo {
            name: "adam".into(),
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            clip_norm: self.clip_norm,
        }
    }

    fn validate(&self) -> Result<(), EncoderError> {
        let ok = self.lr > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0
            && self.clip_norm >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(EncoderError::Config(format!("invalid optimizer settings {self:?}")))
        }
    }
}

struct Adam {
    cfg: AdamConfig,
    m: Weights,
    v: Weights,
    t: i32,
}

impl Adam {
    fn new(cfg: AdamConfig, like: &Weights) -> Self {
        let mut m = like.clone();
        m.fill_zero();
        Self {
            cfg,
            v: m.clone(),
            m,
            t: 0,
        }
    }

    fn step(&mut self, w: &mut Weights, grads: &Weights) {
        self.t += 1;
        let norm = grads
            .tensors()
            .iter()
            .flat_map(|(_, _, d)| d.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt();
        let clip = if self.cfg.clip_norm > 0.0 && norm > self.cfg.clip_norm {
            self.cfg.clip_norm / norm
        } else {
            1.0
        };
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
            ..
        } = self.cfg;
        let bc1 = 1.0 - beta1.powi(self.t);
        let bc2 = 1.0 - beta2.powi(self.t);
        let params = w.tensors_mut();
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        for (((p, m), v), (_, _, g)) in params.into_iter().zip(ms).zip(vs).zip(grads.tensors()) {
            for i in 0..p.len() {
                let gi = g[i] * clip;
                m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
                v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
                p[i] -= lr * (m[i] / bc1) / ((v[i] / bc2).sqrt() + eps);
            }
        }
    }
}

/// The standard 80/10/10 corruption recipe over a `mask_frac` selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskingConfig {
    pub mask_frac: f64,
    pub replace_mask: f64,
    pub replace_random: f64,
    pub keep: f64,
}

impl Default for MaskingConfig {
    fn default() -> Self {
        Self {
            mask_frac: 0.15,
            replace_mask: 0.8,
            replace_random: 0.1,
            keep: 0.1,
        }
    }
}

impl MaskingConfig {
    pub fn validate(&self) -> Result<(), EncoderError> {
        if !(self.mask_frac > 0.0 && self.mask_frac <= 1.0) {
            return Err(EncoderError::Config(format!(
                "mask_frac {} leaves no supervised positions or exceeds 1",
                self.mask_frac
            )));
        }
        let parts = [self.replace_mask, self.replace_random, self.keep];
        if parts.iter().any(|p| !(0.0..=1.0).contains(p))
            || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(EncoderError::Config(format!(
                "replacement fractions {parts:?} must be in [0, 1] and sum to 1"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PretrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub max_len: usize,
    pub masking: MaskingConfig,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            steps: 1000,
            batch_size: 8,
            max_len: DEFAULT_MAX_LEN,
            masking: MaskingConfig::default(),
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

fn wrap_ids(t: &TokenizedText, vocab: &Vocabulary, max_len: usize) -> Vec<u32> {
    let keep = t.len().min(max_len.saturating_sub(2));
    let mut ids = Vec::with_capacity(keep + 2);
    ids.push(vocab.cls_id());
    ids.extend_from_slice(&t.ids[..keep]);
    ids.push(vocab.sep_id());
    ids
}

struct Masker {
    cfg: MaskingConfig,
    mask_id: u32,
    random_pool: Vec<u32>,
}

impl Masker {
    fn new(cfg: MaskingConfig, vocab: &Vocabulary) -> Self {
        let random_pool = (0..vocab.len() as u32)
            .filter(|&id| {
                !vocab.is_special_id(id) && !is_placeholder(vocab.token(id).unwrap_or_default())
            })
            .collect();
        Self {
            cfg,
            mask_id: vocab.mask_id(),
            random_pool,
        }
    }

    /// Corrupts a `[CLS] ... [SEP]` sequence. Returns the corrupted ids, the
    /// selected positions and their original ids.
    fn apply(&self, ids: &[u32], rng: &mut ChaCha8Rng) -> (Vec<u32>, Vec<usize>, Vec<usize>) {
        let inner = 1..ids.len().saturating_sub(1);
        let mut positions: Vec<usize> = inner
            .clone()
            .filter(|_| rng.gen::<f64>() < self.cfg.mask_frac)
            .collect();
        if positions.is_empty() && !inner.is_empty() {
            positions.push(rng.gen_range(inner));
        }
        let mut out = ids.to_vec();
        for &p in &positions {
            let u: f64 = rng.gen();
            if u < self.cfg.replace_mask {
                out[p] = self.mask_id;
            } else if u < self.cfg.replace_mask + self.cfg.replace_random {
                if let Some(&r) = self.random_pool.choose(rng) {
                    out[p] = r;
                }
            }
        }
        let targets = positions.iter().map(|&p| ids[p] as usize).collect();
        (out, positions, targets)
    }
}

fn mlm_sequences(
    texts: &[&str],
    vocab: &Vocabulary,
    max_len: usize,
) -> Result<Vec<Vec<u32>>, EncoderError> {
    let seqs: Vec<Vec<u32>> = texts
        .iter()
        .map(|t| tokenize(t, vocab))
        .filter(|t| !t.is_empty())
        .map(|t| wrap_ids(&t, vocab, max_len))
        .collect();
    if seqs.is_empty() {
        return Err(EncoderError::Config("pre-training corpus has no tokens".into()));
    }
    Ok(seqs)
}

fn check_max_len(ckpt: &Checkpoint, max_len: usize) -> Result<(), EncoderError> {
    if max_len < 3 || max_len > ckpt.config.max_positions {
        return Err(EncoderError::Config(format!(
            "max_len {max_len} must be in 3..={}",
            ckpt.config.max_positions
        )));
    }
    Ok(())
}

/// Cycles through `n` items in per-epoch shuffled order.
struct Sampler {
    order: Vec<usize>,
    pos: usize,
    rng: ChaCha8Rng,
}

impl Sampler {
    fn new(n: usize, rng: ChaCha8Rng) -> Self {
        Self {
            order: (0..n).collect(),
            pos: n,
            rng,
        }
    }

    fn next(&mut self) -> usize {
        if self.pos == self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.pos = 0;
        }
        self.pos += 1;
        self.order[self.pos - 1]
    }
}

/// Masked-language-model training over `texts`, one sequence per text.
pub fn pretrain_mlm(
    ckpt: &Checkpoint,
    texts: &[&str],
    vocab: &Vocabulary,
    cfg: &PretrainConfig,
) -> Result<(Checkpoint, Vec<TrainRecord>), EncoderError> {
    cfg.masking.validate()?;
    cfg.adam.validate()?;
    ckpt.check_vocab(vocab)?;
    check_max_len(ckpt, cfg.max_len)?;
    if cfg.batch_size == 0 {
        return Err(EncoderError::Config("batch_size must be positive".into()));
    }
    let seqs = mlm_sequences(texts, vocab, cfg.max_len)?;
    let mut out = ckpt.clone();
    if cfg.steps == 0 {
        return Ok((out, Vec::new()));
    }

    let masker = Masker::new(cfg.masking, vocab);
    let mut sampler = Sampler::new(seqs.len(), ChaCha8Rng::seed_from_u64(cfg.seed));
    let mut mask_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6d61_736b);
    let mut drop_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6472_6f70);
    let mut adam = Adam::new(cfg.adam, &out.weights);
    let mut grads = Weights::zeros(&out.config);
    let mut records = Vec::with_capacity(cfg.steps);

    for step in 1..=cfg.steps {
        grads.fill_zero();
        let batch: Vec<_> = (0..cfg.batch_size)
            .map(|_| masker.apply(&seqs[sampler.next()], &mut mask_rng))
            .collect();
        let total: usize = batch.iter().map(|b| b.1.len()).sum();
        let scale = 1.0 / total as f64;
        let (mut loss, mut correct) = (0.0, 0);
        for (ids, positions, targets) in &batch {
            let mask = vec![1u8; ids.len()];
            let (h, cache) =
                forward_cached(&out.weights, &out.config, ids, &mask, Some(&mut drop_rng))?;
            let (l, c, dh) = mlm_head(&out.weights, &h, positions, targets, scale, &mut grads);
            loss += l;
            correct += c;
            backward(&out.weights, &out.config, &cache, dh, &mut grads, GradFault::None);
        }
        let loss = loss / total as f64;
        if !loss.is_finite() {
            return Err(EncoderError::NonFiniteLoss { step });
        }
        adam.step(&mut out.weights, &grads);
        records.push(TrainRecord {
            step,
            loss,
            accuracy: correct as f64 / total as f64,
        });
        if step % 100 == 0 {
            log::info!("mlm step {step}: loss {loss:.4}");
        }
    }
    out.step += cfg.steps as u64;
    out.optimizer = Some(cfg.adam.info());
    Ok((out, records))
}

/// Masked-token accuracy in inference mode, with corruption drawn from `seed`.
pub fn mlm_accuracy(
    ckpt: &Checkpoint,
    texts: &[&str],
    vocab: &Vocabulary,
    masking: &MaskingConfig,
    max_len: usize,
    seed: u64,
) -> Result<f64, EncoderError> {
    masking.validate()?;
    check_max_len(ckpt, max_len)?;
    let seqs = mlm_sequences(texts, vocab, max_len)?;
    let masker = Masker::new(*masking, vocab);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scratch = Weights::zeros(&ckpt.config);
    let (mut hit, mut total) = (0, 0);
    for s in &seqs {
        let (ids, positions, targets) = masker.apply(s, &mut rng);
        let mask = vec![1u8; ids.len()];
        let (h, _) = forward_cached(&ckpt.weights, &ckpt.config, &ids, &mask, None)?;
        let (_, c, _) = mlm_head(&ckpt.weights, &h, &positions, &targets, 0.0, &mut scratch);
        hit += c;
        total += positions.len();
    }
    Ok(hit as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerExample {
    /// `[CLS] pieces [SEP]` ids.
    pub ids: Vec<u32>,
    /// Tag class per position; `None` where the loss is skipped.
    pub labels: Vec<Option<usize>>,
}

/// Encoded fine-tuning data, tied to the vocabulary that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerDataset {
    pub vocab_digest: String,
    pub max_len: usize,
    pub examples: Vec<NerExample>,
}

/// Sentence ranges, merged wherever an entity crosses a boundary.
pub(crate) fn segments(text: &str, entities: &[EntitySpan]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (s, e) in split_sentences(text) {
        if let Some(last) = out.last_mut() {
            if entities.iter().any(|x| x.start < last.1 && x.end > last.1) {
                last.1 = e;
                continue;
            }
        }
        out.push((s, e));
    }
    out
}

/// Window starts over `n` pieces: width `max_len - 2`, stride `max_len / 2`.
fn windows(n: usize, max_len: usize) -> Vec<(usize, usize)> {
    let width = max_len - 2;
    if n <= width {
        return vec![(0, n)];
    }
    let stride = (max_len / 2).max(1);
    let mut out = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + width).min(n);
        out.push((start, end));
        if end == n {
            break;
        }
        start += stride;
    }
    out
}

impl NerDataset {
    pub fn build(docs: &[Document], vocab: &Vocabulary, max_len: usize) -> Result<Self, EncoderError> {
        if max_len < 3 {
            return Err(EncoderError::Config("max_len must be at least 3".into()));
        }
        let mut examples = Vec::new();
        for doc in docs {
            for (s, e) in segments(&doc.text, &doc.entities) {
                let text = char_slice(&doc.text, s, e);
                let local: Vec<EntitySpan> = doc
                    .entities
                    .iter()
                    .filter(|x| x.start >= s && x.end <= e)
                    .map(|x| EntitySpan::new(x.start - s, x.end - s, x.label))
                    .collect();
                let tok = tokenize(&text, vocab);
                if tok.is_empty() {
                    continue;
                }
                let bio = encode_bio(&tok, &local, AlignmentPolicy::ExpandToWord)?;
                for (ws, we) in windows(tok.len(), max_len) {
                    let mut ids = vec![vocab.cls_id()];
                    ids.extend_from_slice(&tok.ids[ws..we]);
                    ids.push(vocab.sep_id());
                    let mut labels = vec![None];
                    labels.extend(bio.tags[ws..we].iter().map(|t| t.class()));
                    labels.push(None);
                    examples.push(NerExample { ids, labels });
                }
            }
        }
        Ok(Self {
            vocab_digest: vocab.digest(),
            max_len,
            examples,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NerHyper {
    pub max_len: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for NerHyper {
    fn default() -> Self {
        Self {
            max_len: DEFAULT_MAX_LEN,
            batch_size: 32,
            epochs: 10,
            adam: AdamConfig {
                lr: 5e-3,
                ..AdamConfig::default()
            },
            seed: 0,
        }
    }
}

/// Token-classification fine-tuning. Positions labelled `None` are excluded
/// from the loss.
pub fn finetune_ner(
    ckpt: &Checkpoint,
    data: &NerDataset,
    hyper: &NerHyper,
) -> Result<(Checkpoint, Vec<TrainRecord>), EncoderError> {
    if data.vocab_digest != ckpt.vocab_digest {
        return Err(EncoderError::VocabMismatch {
            checkpoint: ckpt.vocab_digest.clone(),
            data: data.vocab_digest.clone(),
        });
    }
    hyper.adam.validate()?;
    check_max_len(ckpt, hyper.max_len)?;
    if data.max_len > hyper.max_len {
        return Err(EncoderError::Config(format!(
            "data encoded with max_len {} above the configured {}",
            data.max_len, hyper.max_len
        )));
    }
    if hyper.batch_size == 0 {
        return Err(EncoderError::Config("batch_size must be positive".into()));
    }
    let mut out = ckpt.clone();
    let usable: Vec<&NerExample> = data
        .examples
        .iter()
        .filter(|e| e.labels.iter().any(Option::is_some))
        .collect();
    if hyper.epochs == 0 || usable.is_empty() {
        return Ok((out, Vec::new()));
    }

    let mut order_rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut drop_rng = ChaCha8Rng::seed_from_u64(hyper.seed ^ 0x6472_6f70);
    let mut adam = Adam::new(hyper.adam, &out.weights);
    let mut grads = Weights::zeros(&out.config);
    let mut records = Vec::new();
    let mut order: Vec<usize> = (0..usable.len()).collect();
    let mut step = 0;
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut order_rng);
        for chunk in order.chunks(hyper.batch_size) {
            step += 1;
            grads.fill_zero();
            let total: usize = chunk
                .iter()
                .map(|&i| usable[i].labels.iter().flatten().count())
                .sum();
            let scale = 1.0 / total as f64;
            let (mut loss, mut correct) = (0.0, 0);
            for &i in chunk {
                let ex = usable[i];
                let mask = vec![1u8; ex.ids.len()];
                let (h, cache) =
                    forward_cached(&out.weights, &out.config, &ex.ids, &mask, Some(&mut drop_rng))?;
                let (l, c, dh) = ner_head(&out.weights, &h, &ex.labels, scale, &mut grads);
                loss += l;
                correct += c;
                backward(&out.weights, &out.config, &cache, dh, &mut grads, GradFault::None);
            }
            let loss = loss / total as f64;
            if !loss.is_finite() {
                return Err(EncoderError::NonFiniteLoss { step });
            }
            adam.step(&mut out.weights, &grads);
            records.push(TrainRecord {
                step,
                loss,
                accuracy: correct as f64 / total as f64,
            });
        }
        log::info!("ner epoch {}: loss {:.4}", epoch + 1, records.last().map_or(0.0, |r| r.loss));
    }
    out.step += step as u64;
    out.optimizer = Some(hyper.adam.info());
    Ok((out, records))
}

/// Tags for one tokenized segment. Long segments run in overlapping windows;
/// each piece takes its prediction from the window where it sits nearest the
/// center. Continuation pieces get `Ignore`.
pub fn predict_tags(
    ckpt: &Checkpoint,
    tok: &TokenizedText,
    vocab: &Vocabulary,
    max_len: usize,
) -> Result<Vec<Tag>, EncoderError> {
    check_max_len(ckpt, max_len)?;
    let n = tok.len();
    let mut best: Vec<Option<(f64, Tag)>> = vec![None; n];
    if n == 0 {
        return Ok(Vec::new());
    }
    for (ws, we) in windows(n, max_len) {
        let mut ids = vec![vocab.cls_id()];
        ids.extend_from_slice(&tok.ids[ws..we]);
        ids.push(vocab.sep_id());
        let mask = vec![1u8; ids.len()];
        let (h, _) = forward_cached(&ckpt.weights, &ckpt.config, &ids, &mask, None)?;
        let logits = ner_logits(&ckpt.weights, &h);
        let center = (ws + we) as f64 / 2.0;
        for (i, slot) in best.iter_mut().enumerate().take(we).skip(ws) {
            let dist = (i as f64 + 0.5 - center).abs();
            if slot.is_some_and(|(d, _)| d <= dist) {
                continue;
            }
            let row = logits.index_axis(Axis(0), i - ws + 1);
            let arg = row
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |a, (k, &v)| if v > a.1 { (k, v) } else { a })
                .0;
            *slot = Some((dist, Tag::from_class(arg).unwrap_or(Tag::O)));
        }
    }
    Ok(best
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            if tok.is_continuation[i] {
                Tag::Ignore
            } else {
                b.map_or(Tag::O, |(_, t)| t)
            }
        })
        .collect())
}

/// Entity spans for `text`, sentence by sentence.
pub fn predict(
    ckpt: &Checkpoint,
    text: &str,
    vocab: &Vocabulary,
    max_len: usize,
) -> Result<Vec<EntitySpan>, EncoderError> {
    ckpt.check_vocab(vocab)?;
    let mut spans = Vec::new();
    for (s, e) in segments(text, &[]) {
        let seg = char_slice(text, s, e);
        let tok = tokenize(&seg, vocab);
        let tags = predict_tags(ckpt, &tok, vocab, max_len)?;
        for x in decode_bio(&tags, &tok, false)? {
            spans.push(EntitySpan::new(x.start + s, x.end + s, x.label));
        }
    }
    spans.sort();
    Ok(spans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::ModelConfig;
    use crate::tokenizer::SPECIAL_TOKENS;

    fn vocab() -> Vocabulary {
        let mut toks: Vec<String> = SPECIAL_TOKENS.iter().map(|s| s.to_string()).collect();
        toks.extend(
            ["the", "tumor", "is", "er", "positive", "negative", "left", "breast", "."]
                .map(String::from),
        );
        Vocabulary::from_tokens(toks).unwrap()
    }

    fn ckpt(v: &Vocabulary) -> Checkpoint {
        Checkpoint::init(ModelConfig::tiny(v.len()), v).unwrap()
    }

    #[test]
    fn windows_cover_everything() {
        assert_eq!(windows(5, 10), vec![(0, 5)]);
        let w = windows(300, 128);
        assert_eq!(w.first(), Some(&(0, 126)));
        assert_eq!(w.last().unwrap().1, 300);
        assert!(w.windows(2).all(|p| p[1].0 - p[0].0 == 64));
    }

    #[test]
    fn zero_steps_is_identity() {
        let v = vocab();
        let c = ckpt(&v);
        let cfg = PretrainConfig {
            steps: 0,
            max_len: 16,
            ..Default::default()
        };
        let (out, recs) = pretrain_mlm(&c, &["the tumor is er positive"], &v, &cfg).unwrap();
        assert_eq!(out, c);
        assert!(recs.is_empty());
    }

    #[test]
    fn zero_mask_fraction_is_config_error() {
        let v = vocab();
        let mut cfg = PretrainConfig {
            max_len: 16,
            ..Default::default()
        };
        cfg.masking.mask_frac = 0.0;
        let r = pretrain_mlm(&ckpt(&v), &["the tumor"], &v, &cfg);
        assert!(matches!(r, Err(EncoderError::Config(_))));
    }

    #[test]
    fn pretraining_is_deterministic_and_tied() {
        let v = vocab();
        let c = ckpt(&v);
        let cfg = PretrainConfig {
            steps: 5,
            batch_size: 2,
            max_len: 16,
            ..Default::default()
        };
        let texts = ["the tumor is er positive .", "left breast ."];
        let (a, ra) = pretrain_mlm(&c, &texts, &v, &cfg).unwrap();
        let (b, rb) = pretrain_mlm(&c, &texts, &v, &cfg).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(a, b);
        assert_eq!(a.weights.mlm_decoder(), &a.weights.tok_emb);
        assert_eq!(a.step, 5);
        assert!(ra.iter().all(|r| r.loss.is_finite() && r.loss >= 0.0));
    }

    #[test]
    fn digest_mismatch_rejected() {
        let v = vocab();
        let c = ckpt(&v);
        let mut data = NerDataset::build(&[], &v, 16).unwrap();
        data.vocab_digest = "other".into();
        let r = finetune_ner(&c, &data, &NerHyper { max_len: 16, ..Default::default() });
        assert!(matches!(r, Err(EncoderError::VocabMismatch { .. })));
    }

    #[test]
    fn default_hyperparameters() {
        let h = NerHyper::default();
        assert_eq!((h.max_len, h.batch_size, h.epochs), (128, 32, 10));
    }

    #[test]
    fn empty_document_predicts_nothing() {
        let v = vocab();
        assert!(predict(&ckpt(&v), "", &v, 16).unwrap().is_empty());
    }

    #[test]
    fn segments_never_split_entities() {
        let text = "Grade 2. Tumor is left. Done.";
        let ents = [EntitySpan::new(6, 13, crate::corpus::EntityLabel::CancerGrade)];
        let segs = segments(text, &ents);
        assert!(segs.iter().any(|&(s, e)| s <= 6 && e >= 13));
    }
}
