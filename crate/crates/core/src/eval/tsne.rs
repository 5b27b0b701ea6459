use std::io::Write;

use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    pub exaggeration_iters: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    /// KL is recorded every this many iterations, plus first and last.
    pub kl_every: usize,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            kl_every: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneResult {
    pub coords: Array2<f64>,
    /// `(iteration, KL(P || Q))` with the un-exaggerated P.
    pub kl_trace: Vec<(usize, f64)>,
    pub perplexity: f64,
    pub notices: Vec<String>,
}

const ENTROPY_TOL: f64 = 1e-5;
const MAX_BISECTIONS: usize = 50;

fn sq_distances(x: &Array2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = x
                .row(i)
                .iter()
                .zip(x.row(j))
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    d
}

/// Symmetrized input affinities `p_ij = (p_{j|i} + p_{i|j}) / 2n`, each
/// conditional row calibrated by bisection on its precision so the row's
/// Shannon entropy matches `ln(perplexity)`.
pub fn joint_probabilities(x: &Array2<f64>, perplexity: f64) -> Array2<f64> {
    let n = x.nrows();
    let d = sq_distances(x);
    let target = perplexity.ln();
    let mut cond = Array2::zeros((n, n));
    for i in 0..n {
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        let mut beta = 1.0;
        let mut row = vec![0.0; n];
        for _ in 0..MAX_BISECTIONS {
            let min_d = (0..n)
                .filter(|&j| j != i)
                .map(|j| d[[i, j]])
                .fold(f64::INFINITY, f64::min);
            let mut z = 0.0;
            for j in 0..n {
                row[j] = if j == i { 0.0 } else { (-beta * (d[[i, j]] - min_d)).exp() };
                z += row[j];
            }
            let mut weighted = 0.0;
            for j in 0..n {
                row[j] /= z;
                weighted += row[j] * (d[[i, j]] - min_d);
            }
            // H = ln z + beta * E[d], with distances shifted by min_d.
            let h = z.ln() + beta * weighted;
            let diff = h - target;
            if diff.abs() < ENTROPY_TOL {
                break;
            }
            if diff > 0.0 {
                lo = beta;
                beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
        }
        for j in 0..n {
            cond[[i, j]] = row[j];
        }
    }
    let mut p = &cond + &cond.t();
    p /= 2.0 * n as f64;
    p
}

fn kl(p: &Array2<f64>, q: &Array2<f64>) -> f64 {
    p.iter()
        .zip(q.iter())
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b.max(f64::MIN_POSITIVE)).ln())
        .sum()
}

/// Student-t affinities and their unnormalized kernel.
fn low_dim(y: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let n = y.nrows();
    let mut num = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let d = (y[[i, 0]] - y[[j, 0]]).powi(2) + (y[[i, 1]] - y[[j, 1]]).powi(2);
            let v = 1.0 / (1.0 + d);
            num[[i, j]] = v;
            num[[j, i]] = v;
        }
    }
    let z = num.sum();
    (num.mapv(|v| v / z), num)
}

/// Breaks exact ties between rows with a small seeded perturbation.
fn jitter_duplicates(x: &mut Array2<f64>, rng: &mut ChaCha8Rng, notices: &mut Vec<String>) {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0) * 1e-8;
    let normal = Normal::new(0.0, scale).expect("valid std");
    let n = x.nrows();
    let mut count = 0;
    for i in 1..n {
        if (0..i).any(|j| x.row(i) == x.row(j)) {
            x.row_mut(i).mapv_inplace(|v| v + normal.sample(rng));
            count += 1;
        }
    }
    if count > 0 {
        notices.push(format!("jittered {count} duplicate point(s)"));
    }
}

/// Exact t-SNE into two dimensions.
pub fn tsne(x: &Array2<f64>, cfg: &TsneConfig) -> Result<TsneResult, EvalError> {
    let n = x.nrows();
    if n < 4 {
        return Err(EvalError::TooFewPoints(n));
    }
    if cfg.perplexity.is_nan() || cfg.perplexity <= 0.0 || cfg.learning_rate <= 0.0 {
        return Err(EvalError::Config("perplexity and learning rate must be positive".into()));
    }
    let mut notices = Vec::new();
    let max_perp = (n - 1) as f64 / 3.0;
    let perplexity = if cfg.perplexity > max_perp {
        notices.push(format!("perplexity {} clamped to {max_perp:.3}", cfg.perplexity));
        max_perp
    } else {
        cfg.perplexity
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = x.clone();
    jitter_duplicates(&mut x, &mut rng, &mut notices);
    let p = joint_probabilities(&x, perplexity);

    let init = Normal::new(0.0, 1e-4).expect("valid std");
    let mut y = Array2::from_shape_fn((n, 2), |_| init.sample(&mut rng));
    let mut update = Array2::<f64>::zeros((n, 2));
    let mut gains = Array2::<f64>::ones((n, 2));
    let mut kl_trace = vec![(0, kl(&p, &low_dim(&y).0))];

    for it in 1..=cfg.iterations {
        let exaggerate = it <= cfg.exaggeration_iters;
        let factor = if exaggerate { cfg.early_exaggeration } else { 1.0 };
        let momentum = if exaggerate { cfg.initial_momentum } else { cfg.final_momentum };
        let (q, num) = low_dim(&y);
        let mut grad = Array2::<f64>::zeros((n, 2));
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let m = 4.0 * (factor * p[[i, j]] - q[[i, j]]) * num[[i, j]];
                grad[[i, 0]] += m * (y[[i, 0]] - y[[j, 0]]);
                grad[[i, 1]] += m * (y[[i, 1]] - y[[j, 1]]);
            }
        }
        for ((g, u), gain) in grad.iter().zip(update.iter()).zip(gains.iter_mut()) {
            *gain = if (*g > 0.0) != (*u > 0.0) { *gain + 0.2 } else { *gain * 0.8 };
            *gain = gain.max(0.01);
        }
        update = &update * momentum - &(&gains * &grad) * cfg.learning_rate;
        y += &update;
        let mean = y.mean_axis(Axis(0)).expect("n > 0");
        y -= &mean;
        if it % cfg.kl_every.max(1) == 0 || it == cfg.iterations {
            kl_trace.push((it, kl(&p, &low_dim(&y).0)));
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(EvalError::Config("t-SNE diverged".into()));
    }
    Ok(TsneResult {
        coords: y,
        kl_trace,
        perplexity,
        notices,
    })
}

/// `token,label,x,y` rows with a header.
pub fn write_coords<W: Write>(
    w: W,
    tokens: &[String],
    labels: &[String],
    coords: &Array2<f64>,
) -> Result<(), EvalError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["token", "label", "x", "y"])
        .map_err(|e| EvalError::Config(e.to_string()))?;
    for (i, (t, l)) in tokens.iter().zip(labels).enumerate() {
        out.write_record([
            t.as_str(),
            l.as_str(),
            &coords[[i, 0]].to_string(),
            &coords[[i, 1]].to_string(),
        ])
        .map_err(|e| EvalError::Config(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}
