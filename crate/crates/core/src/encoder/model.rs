use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erf;

use super::{EncoderError, ModelConfig, Weights};

const LN_EPS: f64 = 1e-12;
const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Deliberate gradient bugs, used only to prove the gradient check can fail.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradFault {
    #[default]
    None,
    /// Drops the row-sum term of the softmax Jacobian in attention.
    AttentionSoftmax,
}

pub(crate) struct LnCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
}

struct LayerCache {
    input: Array2<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    probs: Vec<Array2<f64>>,
    ctx: Array2<f64>,
    drop_attn: Option<Array2<f64>>,
    ln1: LnCache,
    h1: Array2<f64>,
    pre_act: Array2<f64>,
    act: Array2<f64>,
    drop_ffn: Option<Array2<f64>>,
    ln2: LnCache,
}

pub(crate) struct Cache {
    ids: Vec<u32>,
    emb_ln: LnCache,
    emb_drop: Option<Array2<f64>>,
    layers: Vec<LayerCache>,
}

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + erf(x / SQRT_2))
}

fn gelu_grad(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / SQRT_2)) + x * INV_SQRT_2PI * (-0.5 * x * x).exp()
}

fn layer_norm(x: &Array2<f64>, g: &Array1<f64>, b: &Array1<f64>) -> (Array2<f64>, LnCache) {
    let d = x.ncols() as f64;
    let mut xhat = x.clone();
    let mut inv_std = Array1::zeros(x.nrows());
    for (mut row, is) in xhat.rows_mut().into_iter().zip(inv_std.iter_mut()) {
        let mean = row.sum() / d;
        row.mapv_inplace(|v| v - mean);
        let var = row.iter().map(|v| v * v).sum::<f64>() / d;
        *is = 1.0 / (var + LN_EPS).sqrt();
        let s = *is;
        row.mapv_inplace(|v| v * s);
    }
    let y = &xhat * g + b;
    (y, LnCache { xhat, inv_std })
}

fn layer_norm_backward(
    dy: &Array2<f64>,
    cache: &LnCache,
    g: &Array1<f64>,
    dg: &mut Array1<f64>,
    db: &mut Array1<f64>,
) -> Array2<f64> {
    *dg += &(dy * &cache.xhat).sum_axis(Axis(0));
    *db += &dy.sum_axis(Axis(0));
    let d = dy.ncols() as f64;
    let mut dx = dy * g;
    for ((mut row, xh), &is) in dx
        .rows_mut()
        .into_iter()
        .zip(cache.xhat.rows())
        .zip(cache.inv_std.iter())
    {
        let mean_d = row.sum() / d;
        let mean_dx = row.iter().zip(xh.iter()).map(|(a, b)| a * b).sum::<f64>() / d;
        Zip::from(&mut row)
            .and(&xh)
            .for_each(|r, &x| *r = is * (*r - mean_d - x * mean_dx));
    }
    dx
}

fn dropout_mask(
    shape: (usize, usize),
    rate: f64,
    rng: Option<&mut ChaCha8Rng>,
) -> Option<Array2<f64>> {
    let rng = rng?;
    if rate <= 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - rate);
    Some(Array2::from_shape_fn(shape, |_| {
        if rng.gen::<f64>() < rate {
            0.0
        } else {
            keep
        }
    }))
}

fn apply(x: Array2<f64>, mask: &Option<Array2<f64>>) -> Array2<f64> {
    match mask {
        Some(m) => x * m,
        None => x,
    }
}

fn add_row(x: Array2<f64>, b: &Array1<f64>) -> Array2<f64> {
    x + b
}

fn check_input(config: &ModelConfig, ids: &[u32], mask: &[u8]) -> Result<(), EncoderError> {
    if ids.len() > config.max_positions {
        return Err(EncoderError::SequenceTooLong {
            len: ids.len(),
            max: config.max_positions,
        });
    }
    if ids.len() != mask.len() {
        return Err(EncoderError::SizeMismatch(format!(
            "{} ids but {} mask entries",
            ids.len(),
            mask.len()
        )));
    }
    if let Some(&bad) = ids.iter().find(|&&i| i as usize >= config.vocab_size) {
        return Err(EncoderError::SizeMismatch(format!(
            "token id {bad} outside vocabulary of {}",
            config.vocab_size
        )));
    }
    Ok(())
}

/// Row-wise softmax over `scores`, restricted to keys where `keep` is true.
/// Excluded keys get probability exactly zero.
fn masked_softmax(scores: &mut Array2<f64>, keep: &[bool]) {
    for mut row in scores.rows_mut() {
        let max = row
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(v, _)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (v, &k) in row.iter_mut().zip(keep) {
            *v = if k { (*v - max).exp() } else { 0.0 };
            total += *v;
        }
        if total > 0.0 {
            row.mapv_inplace(|v| v / total);
        }
    }
}

/// Runs the encoder; with `rng` present dropout is active.
pub(crate) fn forward_cached(
    w: &Weights,
    config: &ModelConfig,
    ids: &[u32],
    mask: &[u8],
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<(Array2<f64>, Cache), EncoderError> {
    check_input(config, ids, mask)?;
    let t = ids.len();
    let d = config.d_model;
    let keep: Vec<bool> = mask.iter().map(|&m| m != 0).collect();
    let rate = config.dropout_rate;

    let mut x = Array2::zeros((t, d));
    for (i, &id) in ids.iter().enumerate() {
        let mut row = x.row_mut(i);
        row += &w.tok_emb.row(id as usize);
        row += &w.pos_emb.row(i);
    }
    let (h, emb_ln) = layer_norm(&x, &w.emb_ln_g, &w.emb_ln_b);
    let emb_drop = dropout_mask((t, d), rate, rng.as_deref_mut());
    let mut h = apply(h, &emb_drop);

    let dh = config.head_dim();
    let scale = 1.0 / (dh as f64).sqrt();
    let mut layers = Vec::with_capacity(w.layers.len());
    for lw in &w.layers {
        let q = add_row(h.dot(&lw.wq), &lw.bq);
        let k = add_row(h.dot(&lw.wk), &lw.bk);
        let v = add_row(h.dot(&lw.wv), &lw.bv);
        let mut ctx = Array2::zeros((t, d));
        let mut probs = Vec::with_capacity(config.n_heads);
        for head in 0..config.n_heads {
            let cols = s![.., head * dh..(head + 1) * dh];
            let mut sc = q.slice(cols).dot(&k.slice(cols).t()) * scale;
            masked_softmax(&mut sc, &keep);
            ctx.slice_mut(cols).assign(&sc.dot(&v.slice(cols)));
            probs.push(sc);
        }
        let attn = add_row(ctx.dot(&lw.wo), &lw.bo);
        let drop_attn = dropout_mask((t, d), rate, rng.as_deref_mut());
        let r1 = &h + &apply(attn, &drop_attn);
        let (h1, ln1) = layer_norm(&r1, &lw.ln1_g, &lw.ln1_b);
        let pre_act = add_row(h1.dot(&lw.w1), &lw.b1);
        let act = pre_act.mapv(gelu);
        let ffn = add_row(act.dot(&lw.w2), &lw.b2);
        let drop_ffn = dropout_mask((t, d), rate, rng.as_deref_mut());
        let r2 = &h1 + &apply(ffn, &drop_ffn);
        let (out, ln2) = layer_norm(&r2, &lw.ln2_g, &lw.ln2_b);
        layers.push(LayerCache {
            input: std::mem::replace(&mut h, out),
            q,
            k,
            v,
            probs,
            ctx,
            drop_attn,
            ln1,
            h1,
            pre_act,
            act,
            drop_ffn,
            ln2,
        });
    }
    Ok((
        h,
        Cache {
            ids: ids.to_vec(),
            emb_ln,
            emb_drop,
            layers,
        },
    ))
}

/// Accumulates parameter gradients into `grads` given the gradient of the
/// loss with respect to the final hidden states.
pub(crate) fn backward(
    w: &Weights,
    config: &ModelConfig,
    cache: &Cache,
    mut dh: Array2<f64>,
    grads: &mut Weights,
    fault: GradFault,
) {
    let hd = config.head_dim();
    let scale = 1.0 / (hd as f64).sqrt();
    for (li, lc) in cache.layers.iter().enumerate().rev() {
        let lw = &w.layers[li];
        let lg = &mut grads.layers[li];

        let dr2 = layer_norm_backward(&dh, &lc.ln2, &lw.ln2_g, &mut lg.ln2_g, &mut lg.ln2_b);
        let dffn = apply(dr2.clone(), &lc.drop_ffn);
        lg.w2 += &lc.act.t().dot(&dffn);
        lg.b2 += &dffn.sum_axis(Axis(0));
        let mut du = dffn.dot(&lw.w2.t());
        Zip::from(&mut du)
            .and(&lc.pre_act)
            .for_each(|g, &x| *g *= gelu_grad(x));
        lg.w1 += &lc.h1.t().dot(&du);
        lg.b1 += &du.sum_axis(Axis(0));
        let dh1 = dr2 + du.dot(&lw.w1.t());

        let dr1 = layer_norm_backward(&dh1, &lc.ln1, &lw.ln1_g, &mut lg.ln1_g, &mut lg.ln1_b);
        let dattn = apply(dr1.clone(), &lc.drop_attn);
        lg.wo += &lc.ctx.t().dot(&dattn);
        lg.bo += &dattn.sum_axis(Axis(0));
        let dctx = dattn.dot(&lw.wo.t());

        let mut dq = Array2::zeros(lc.q.raw_dim());
        let mut dk = Array2::zeros(lc.k.raw_dim());
        let mut dv = Array2::zeros(lc.v.raw_dim());
        for (head, p) in lc.probs.iter().enumerate() {
            let cols = s![.., head * hd..(head + 1) * hd];
            let dc = dctx.slice(cols);
            dv.slice_mut(cols).assign(&p.t().dot(&dc));
            let dp = dc.dot(&lc.v.slice(cols).t());
            let ds = softmax_backward(p, &dp, fault) * scale;
            dq.slice_mut(cols).assign(&ds.dot(&lc.k.slice(cols)));
            dk.slice_mut(cols).assign(&ds.t().dot(&lc.q.slice(cols)));
        }
        lg.wq += &lc.input.t().dot(&dq);
        lg.bq += &dq.sum_axis(Axis(0));
        lg.wk += &lc.input.t().dot(&dk);
        lg.bk += &dk.sum_axis(Axis(0));
        lg.wv += &lc.input.t().dot(&dv);
        lg.bv += &dv.sum_axis(Axis(0));
        dh = dr1 + dq.dot(&lw.wq.t()) + dk.dot(&lw.wk.t()) + dv.dot(&lw.wv.t());
    }

    let dh = apply(dh, &cache.emb_drop);
    let dx = layer_norm_backward(
        &dh,
        &cache.emb_ln,
        &w.emb_ln_g,
        &mut grads.emb_ln_g,
        &mut grads.emb_ln_b,
    );
    for (i, &id) in cache.ids.iter().enumerate() {
        let mut row = grads.tok_emb.row_mut(id as usize);
        row += &dx.row(i);
        let mut row = grads.pos_emb.row_mut(i);
        row += &dx.row(i);
    }
}

fn softmax_backward(p: &Array2<f64>, dp: &Array2<f64>, fault: GradFault) -> Array2<f64> {
    let mut ds = p * dp;
    if fault == GradFault::AttentionSoftmax {
        return ds;
    }
    for (mut row, prow) in ds.rows_mut().into_iter().zip(p.rows()) {
        let dot = row.sum();
        Zip::from(&mut row).and(&prow).for_each(|d, &pv| *d -= pv * dot);
    }
    ds
}

/// Log-softmax cross-entropy over each row against `targets`. Returns the
/// summed loss, the number of rows whose argmax hits the target, and
/// `scale * dlogits`.
pub(crate) fn softmax_xent(
    logits: ArrayView2<f64>,
    targets: &[usize],
    scale: f64,
) -> (f64, usize, Array2<f64>) {
    let mut grad = logits.to_owned();
    let mut loss = 0.0;
    let mut correct = 0;
    for (mut row, &t) in grad.rows_mut().into_iter().zip(targets) {
        let (arg, max) = row
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        if arg == t {
            correct += 1;
        }
        let target = row[t];
        row.mapv_inplace(|v| (v - max).exp());
        let z = row.sum();
        loss += z.ln() + max - target;
        row.mapv_inplace(|v| v / z * scale);
        row[t] -= scale;
    }
    (loss, correct, grad)
}

/// Masked-language-model loss at `positions`, decoder tied to the token
/// embeddings. Gradients (scaled by `scale`) go into `grads`; the returned
/// matrix is the gradient with respect to the hidden states.
pub(crate) fn mlm_head(
    w: &Weights,
    h: &Array2<f64>,
    positions: &[usize],
    targets: &[usize],
    scale: f64,
    grads: &mut Weights,
) -> (f64, usize, Array2<f64>) {
    let hm = h.select(Axis(0), positions);
    let logits = add_row(hm.dot(&w.tok_emb.t()), &w.mlm_bias);
    let (loss, correct, dlogits) = softmax_xent(logits.view(), targets, scale);
    grads.tok_emb += &dlogits.t().dot(&hm);
    grads.mlm_bias += &dlogits.sum_axis(Axis(0));
    let dhm = dlogits.dot(&w.tok_emb);
    let mut dh = Array2::zeros(h.raw_dim());
    for (r, &p) in positions.iter().enumerate() {
        let mut row = dh.row_mut(p);
        row += &dhm.row(r);
    }
    (loss, correct, dh)
}

/// Token-classification loss over positions with a label.
pub(crate) fn ner_head(
    w: &Weights,
    h: &Array2<f64>,
    labels: &[Option<usize>],
    scale: f64,
    grads: &mut Weights,
) -> (f64, usize, Array2<f64>) {
    let positions: Vec<usize> = (0..labels.len()).filter(|&i| labels[i].is_some()).collect();
    let targets: Vec<usize> = positions.iter().map(|&i| labels[i].unwrap()).collect();
    let hm = h.select(Axis(0), &positions);
    let logits = add_row(hm.dot(&w.ner_w), &w.ner_b);
    let (loss, correct, dlogits) = softmax_xent(logits.view(), &targets, scale);
    grads.ner_w += &hm.t().dot(&dlogits);
    grads.ner_b += &dlogits.sum_axis(Axis(0));
    let dhm = dlogits.dot(&w.ner_w.t());
    let mut dh = Array2::zeros(h.raw_dim());
    for (r, &p) in positions.iter().enumerate() {
        let mut row = dh.row_mut(p);
        row += &dhm.row(r);
    }
    (loss, correct, dh)
}

pub(crate) fn ner_logits(w: &Weights, h: &Array2<f64>) -> Array2<f64> {
    add_row(h.dot(&w.ner_w), &w.ner_b)
}

/// Hidden states `[seq_len × d_model]` in inference mode. Positions with mask
/// 0 are never attended to.
pub fn forward(
    weights: &Weights,
    config: &ModelConfig,
    ids: &[u32],
    attention_mask: &[u8],
) -> Result<Array2<f64>, EncoderError> {
    forward_cached(weights, config, ids, attention_mask, None).map(|(h, _)| h)
}

pub fn forward_batch(
    weights: &Weights,
    config: &ModelConfig,
    batch: &[(Vec<u32>, Vec<u8>)],
) -> Result<Vec<Array2<f64>>, EncoderError> {
    batch
        .iter()
        .map(|(ids, mask)| forward(weights, config, ids, mask))
        .collect()
}
