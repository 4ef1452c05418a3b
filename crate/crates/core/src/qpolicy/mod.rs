//! Goal-conditioned action scoring and TD learning.
//!
//! A hashed bag-of-n-grams encoder feeds a one-hidden-layer scorer that
//! rates every valid action. Training minimizes the smooth-L1 TD error
//! against gradient-stopped bootstrap targets plus a weighted normalized
//! entropy of the softmax policy.

mod encoder;
mod model;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use encoder::{tokenize, Channel, HashedEncoder, SparseVec, TextEncoder, CHANNELS};
pub use model::{
    FeatureCache, Gradient, LearnConfig, Optimizer, ParamRef, QModel, CHECKPOINT_FORMAT, CHECKPOINT_VERSION,
    DEFAULT_INIT_SCALE,
};

#[derive(Debug, Error)]
pub enum QPolicyError {
    #[error("empty training batch")]
    EmptyBatch,
    #[error("non-finite loss or gradient, step skipped: {0}")]
    NonFinite(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Batch-mean losses; `total = td_term + λ_H · entropy_term`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub td_term: f64,
    pub entropy_term: f64,
    pub total: f64,
    pub batch_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectMode {
    /// Sample from the softmax of the scores.
    Train,
    /// Argmax, lowest index on ties.
    Eval,
}

/// `|d| − 0.5` beyond unit error, `0.5·d²` inside, with `d = x − y`.
pub fn smooth_l1(x: f64, y: f64) -> f64 {
    let d = (x - y).abs();
    if d > 1.0 {
        d - 0.5
    } else {
        0.5 * d * d
    }
}

/// Derivative of `smooth_l1` with respect to `x`.
pub fn smooth_l1_grad(x: f64, y: f64) -> f64 {
    (x - y).clamp(-1.0, 1.0)
}

fn softmax(scores: &[f64], temperature: f64) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| ((s - max) / temperature).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Entropy of `softmax(scores)` divided by `log n`; 0 for a single action.
pub fn normalized_entropy(scores: &[f64]) -> f64 {
    normalized_entropy_grad(scores, 1.0).0
}

/// Normalized entropy of `softmax(scores / temperature)` and its gradient
/// with respect to the scores.
pub fn normalized_entropy_grad(scores: &[f64], temperature: f64) -> (f64, Vec<f64>) {
    let n = scores.len();
    if n <= 1 {
        return (0.0, vec![0.0; n]);
    }
    // Equal scores: exactly uniform, where the gradient vanishes.
    if scores.iter().all(|s| *s == scores[0]) {
        return (1.0, vec![0.0; n]);
    }
    let p = softmax(scores, temperature);
    let logp: Vec<f64> = p.iter().map(|pk| if *pk > 0.0 { pk.ln() } else { 0.0 }).collect();
    let h: f64 = -p.iter().zip(&logp).map(|(pk, lk)| pk * lk).sum::<f64>();
    let norm = (n as f64).ln();
    let grad = p.iter().zip(&logp).map(|(pk, lk)| -pk * (lk + h) / (temperature * norm)).collect();
    ((h / norm).clamp(0.0, 1.0), grad)
}

/// Index of the largest score, lowest index on ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

/// Picks an action index from finite, non-empty scores.
pub fn select_action<R: Rng>(scores: &[f64], mode: SelectMode, temperature: f64, rng: &mut R) -> usize {
    assert!(!scores.is_empty(), "no actions to select from");
    match mode {
        SelectMode::Eval => argmax(scores),
        SelectMode::Train => {
            let p = softmax(scores, temperature);
            WeightedIndex::new(&p).expect("softmax weights are positive").sample(rng)
        }
    }
}
