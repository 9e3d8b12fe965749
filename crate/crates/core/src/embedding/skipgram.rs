//! Skip-gram with negative sampling.
//!
//! For a center token `c` and a context token `o` the per-pair loss is
//!
//! ```text
//! L = -log σ(u_o · v_c) - Σ_k log σ(-u_k · v_c)
//! ```
//!
//! where `v` are input (center) vectors, `u` output (context) vectors and
//! `k` ranges over negatives drawn from the unigram distribution raised to
//! 0.75. The returned embeddings are the input vectors.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Embeddings;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const UNIGRAM_POWER: f64 = 0.75;
const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkipgramConfig {
    pub dim: usize,
    /// Maximum context radius; each position samples its radius from 1..=window.
    pub window: usize,
    /// Frequent-token subsampling threshold; 0 disables subsampling.
    pub subsample: f64,
    pub min_count: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly over training.
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SkipgramConfig {
    fn default() -> Self {
        SkipgramConfig {
            dim: 200,
            window: 10,
            subsample: 1e-3,
            min_count: 0,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            seed: 1,
        }
    }
}

impl SkipgramConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("dim", self.dim),
            ("window", self.window),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
        ] {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("skip-gram {name} must be positive")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(
                "skip-gram learning rate must be positive".into(),
            ));
        }
        if !(self.subsample >= 0.0 && self.subsample.is_finite()) {
            return Err(Error::InvalidParameter(
                "subsample must be a non-negative number".into(),
            ));
        }
        Ok(())
    }
}

/// Input and output vectors, one row per vocabulary entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsParams<S> {
    pub input: Vec<Vec<S>>,
    pub output: Vec<Vec<S>>,
}

/// Dense gradient with the same shape as [`SgnsParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradient<S> {
    pub input: Vec<Vec<S>>,
    pub output: Vec<Vec<S>>,
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

fn sigmoid<S: Scalar>(x: S) -> S {
    S::one() / (S::one() + (-x).exp())
}

/// `log σ(x)` without overflow for large |x|.
fn log_sigmoid<S: Scalar>(x: S) -> S {
    if x >= S::zero() {
        -((-x).exp()).ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Negative-sampling loss of one (center, context) pair.
pub fn sgns_loss<S: Scalar>(params: &SgnsParams<S>, center: usize, context: usize, negatives: &[usize]) -> S {
    let v = &params.input[center];
    let mut loss = -log_sigmoid(dot(&params.output[context], v));
    for &k in negatives {
        loss = loss - log_sigmoid(-dot(&params.output[k], v));
    }
    loss
}

/// Analytic gradient of [`sgns_loss`] with respect to every parameter.
pub fn sgns_gradient<S: Scalar>(
    params: &SgnsParams<S>,
    center: usize,
    context: usize,
    negatives: &[usize],
) -> SgnsGradient<S> {
    let zeros = |m: &Vec<Vec<S>>| m.iter().map(|r| vec![S::zero(); r.len()]).collect::<Vec<_>>();
    let mut grad = SgnsGradient {
        input: zeros(&params.input),
        output: zeros(&params.output),
    };
    let v = &params.input[center];
    // (label, output row): d/ds of -log σ(s) is σ(s) - 1, of -log σ(-s) is σ(s)
    let targets = std::iter::once((S::one(), context)).chain(negatives.iter().map(|&k| (S::zero(), k)));
    for (label, row) in targets {
        let u = &params.output[row];
        let g = sigmoid(dot(u, v)) - label;
        for d in 0..v.len() {
            grad.input[center][d] = grad.input[center][d] + g * u[d];
            grad.output[row][d] = grad.output[row][d] + g * v[d];
        }
    }
    grad
}

/// One SGD step on a single pair; returns the loss before the update.
///
/// All partial derivatives use the parameters as they were before the step,
/// so this equals `params -= lr * sgns_gradient(...)`.
pub fn sgd_step<S: Scalar>(params: &mut SgnsParams<S>, center: usize, context: usize, negatives: &[usize], lr: S) -> S {
    let dim = params.input[center].len();
    let mut center_grad = vec![S::zero(); dim];
    let mut loss = S::zero();
    let mut output_updates: Vec<(usize, S)> = Vec::with_capacity(negatives.len() + 1);
    {
        let v = &params.input[center];
        let targets = std::iter::once((S::one(), context)).chain(negatives.iter().map(|&k| (S::zero(), k)));
        for (label, row) in targets {
            let u = &params.output[row];
            let s = dot(u, v);
            loss = loss
                - if label == S::one() {
                    log_sigmoid(s)
                } else {
                    log_sigmoid(-s)
                };
            let g = sigmoid(s) - label;
            for d in 0..dim {
                center_grad[d] = center_grad[d] + g * u[d];
            }
            output_updates.push((row, g));
        }
    }
    let v_old = params.input[center].clone();
    for (row, g) in output_updates {
        for (u, &x) in params.output[row].iter_mut().zip(&v_old) {
            *u = *u - lr * g * x;
        }
    }
    for (v, g) in params.input[center].iter_mut().zip(center_grad) {
        *v = *v - lr * g;
    }
    loss
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingReport {
    /// Summed pair loss per epoch.
    pub epoch_losses: Vec<f64>,
    /// Number of (center, context) pairs per epoch.
    pub epoch_pairs: Vec<u64>,
    pub vocabulary_size: usize,
}

impl TrainingReport {
    pub fn mean_losses(&self) -> Vec<f64> {
        self.epoch_losses
            .iter()
            .zip(&self.epoch_pairs)
            .map(|(l, &n)| if n == 0 { 0.0 } else { l / n as f64 })
            .collect()
    }
}

/// Trains embeddings over token streams (one stream per passage).
///
/// Deterministic for a fixed `config.seed`.
pub fn train_skipgram<S: Scalar>(
    streams: &[Vec<String>],
    config: &SkipgramConfig,
) -> Result<(Embeddings<S>, TrainingReport)> {
    config.validate()?;
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for s in streams {
        for t in s {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut vocab: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c as usize >= config.min_count)
        .collect();
    if vocab.is_empty() {
        return Err(Error::Validation("skip-gram vocabulary is empty".into()));
    }
    vocab.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let ids: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (t, _))| (*t, i)).collect();
    let total: u64 = vocab.iter().map(|(_, c)| c).sum();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dim = config.dim;
    let half = 0.5 / dim as f64;
    let mut params = SgnsParams {
        input: (0..vocab.len())
            .map(|_| (0..dim).map(|_| S::of(rng.gen_range(-half..half))).collect())
            .collect(),
        output: vec![vec![S::zero(); dim]; vocab.len()],
    };

    let noise = WeightedIndex::new(vocab.iter().map(|(_, c)| (*c as f64).powf(UNIGRAM_POWER)))
        .map_err(|e| Error::Validation(format!("noise distribution: {e}")))?;
    let keep_prob: Vec<f64> = vocab
        .iter()
        .map(|&(_, c)| {
            if config.subsample <= 0.0 {
                return 1.0;
            }
            let freq = c as f64 / total as f64;
            (config.subsample / freq).sqrt().min(1.0)
        })
        .collect();

    let encoded: Vec<Vec<usize>> = streams
        .iter()
        .map(|s| s.iter().filter_map(|t| ids.get(t.as_str()).copied()).collect())
        .collect();
    let planned = (total * config.epochs as u64).max(1) as f64;
    let mut processed = 0u64;
    let mut report = TrainingReport {
        vocabulary_size: vocab.len(),
        ..TrainingReport::default()
    };
    let mut negatives = Vec::with_capacity(config.negatives);

    for _ in 0..config.epochs {
        let mut epoch_loss = 0.0;
        let mut pairs = 0u64;
        for stream in &encoded {
            processed += stream.len() as u64;
            let kept: Vec<usize> = stream
                .iter()
                .copied()
                .filter(|&t| keep_prob[t] >= 1.0 || rng.gen::<f64>() < keep_prob[t])
                .collect();
            let lr = config.learning_rate * (1.0 - processed as f64 / planned).max(MIN_LR_FRACTION);
            let lr = S::of(lr);
            for (i, &center) in kept.iter().enumerate() {
                let radius = rng.gen_range(1..=config.window);
                let lo = i.saturating_sub(radius);
                let hi = (i + radius).min(kept.len() - 1);
                for (j, &context) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    negatives.clear();
                    for _ in 0..config.negatives {
                        let k = noise.sample(&mut rng);
                        if k != context {
                            negatives.push(k);
                        }
                    }
                    epoch_loss += sgd_step(&mut params, center, context, &negatives, lr).as_f64();
                    pairs += 1;
                }
            }
        }
        report.epoch_losses.push(epoch_loss);
        report.epoch_pairs.push(pairs);
    }

    let mut table = Embeddings::with_dim(dim);
    for ((token, _), vector) in vocab.iter().zip(params.input) {
        table.insert(*token, vector)?;
    }
    Ok((table, report))
}
