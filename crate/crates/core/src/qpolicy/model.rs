//! One-hidden-layer goal-conditioned action scorer:
//! `Q(s, g, a) = v · relu(Wᵀ x_sg + Wᵀ x_a + b1) + b2`.
//!
//! `W` has one row of `hidden` weights per hashed feature. An absent row
//! reads as its initial values, a deterministic hash of (seed, feature,
//! unit); rows are stored once updated, so the model only pays for features
//! it has been trained on.

use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::encoder::{Channel, HashedEncoder, SparseVec, CHANNELS};
use super::{normalized_entropy_grad, smooth_l1, smooth_l1_grad, LossBreakdown, QPolicyError};
use crate::replay::Sample;

pub const CHECKPOINT_FORMAT: &str = "autotelic-qmodel";
pub const CHECKPOINT_VERSION: u32 = 1;

/// How a clipped gradient becomes a parameter step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    /// `θ ← θ − lr·g`.
    #[default]
    Sgd,
    /// Adam (β₁ 0.9, β₂ 0.999, ε 1e−8); moments of a `W` row are only
    /// updated when the row has a gradient.
    Adam,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Hyperparameters of one gradient step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub gamma: f64,
    /// Weight of the normalized entropy term; negative values reward entropy.
    pub lambda_h: f64,
    pub learning_rate: f64,
    /// Global gradient-norm clip.
    pub clip_norm: f64,
    /// Softmax temperature of the behaviour policy (also used for the
    /// entropy term).
    pub temperature: f64,
    pub optimizer: Optimizer,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            lambda_h: -0.01,
            learning_rate: 0.01,
            clip_norm: 5.0,
            temperature: 1.0,
            optimizer: Optimizer::Sgd,
        }
    }
}

/// First and second moments of one parameter group.
#[derive(Debug, Clone, PartialEq, Default)]
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Moments {
    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n] }
    }

    /// Applies one Adam step to `params` given the bias-corrected rates.
    fn step(&mut self, params: &mut [f64], grad: &[f64], lr_t: f64) {
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
            *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
            *p -= lr_t * *m / (v.sqrt() + ADAM_EPS);
        }
    }
}

/// Adam state; not part of checkpoints.
#[derive(Debug, Clone, PartialEq, Default)]
struct AdamState {
    t: i32,
    w: FxHashMap<u32, Moments>,
    b1: Moments,
    v: Moments,
    b2: Moments,
}

/// Identifies one scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamRef {
    W(u32, usize),
    B1(usize),
    V(usize),
    B2,
}

/// Gradient of the loss with respect to every parameter it touches.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gradient {
    pub w: FxHashMap<u32, Vec<f64>>,
    pub b1: Vec<f64>,
    pub v: Vec<f64>,
    pub b2: f64,
}

impl Gradient {
    fn zeros(hidden: usize) -> Self {
        Self { w: FxHashMap::default(), b1: vec![0.0; hidden], v: vec![0.0; hidden], b2: 0.0 }
    }

    /// Every entry, sorted by parameter.
    pub fn entries(&self) -> Vec<(ParamRef, f64)> {
        let mut out: Vec<(ParamRef, f64)> = Vec::new();
        let mut rows: Vec<_> = self.w.iter().collect();
        rows.sort_by_key(|(i, _)| **i);
        for (i, row) in rows {
            out.extend(row.iter().enumerate().map(|(j, g)| (ParamRef::W(*i, j), *g)));
        }
        out.extend(self.b1.iter().enumerate().map(|(j, g)| (ParamRef::B1(j), *g)));
        out.extend(self.v.iter().enumerate().map(|(j, g)| (ParamRef::V(j), *g)));
        out.push((ParamRef::B2, self.b2));
        out
    }

    pub fn norm(&self) -> f64 {
        let mut rows: Vec<_> = self.w.iter().collect();
        rows.sort_by_key(|(i, _)| **i);
        let sq = |s: &[f64]| s.iter().map(|x| x * x).sum::<f64>();
        let w: f64 = rows.iter().map(|(_, r)| sq(r)).sum();
        (w + sq(&self.b1) + sq(&self.v) + self.b2 * self.b2).sqrt()
    }

    fn is_finite(&self) -> bool {
        self.b2.is_finite()
            && self.b1.iter().chain(&self.v).all(|x| x.is_finite())
            && self.w.values().flatten().all(|x| x.is_finite())
    }
}

/// Per-channel memo of encoded texts. Cleared when it grows past `cap`
/// entries in a channel, which bounds memory without affecting results.
#[derive(Debug, Clone)]
pub struct FeatureCache {
    encoder: HashedEncoder,
    blocks: [FxHashMap<Arc<str>, Arc<SparseVec>>; CHANNELS as usize],
    cap: usize,
}

impl FeatureCache {
    pub fn new(encoder: HashedEncoder) -> Self {
        Self { encoder, blocks: Default::default(), cap: 50_000 }
    }

    pub fn block(&mut self, channel: Channel, text: &str) -> Arc<SparseVec> {
        let map = &mut self.blocks[channel as usize];
        if let Some(b) = map.get(text) {
            return b.clone();
        }
        if map.len() >= self.cap {
            map.clear();
        }
        let block = Arc::new(self.encoder.encode_channel(channel, text));
        map.insert(Arc::from(text), block.clone());
        block
    }

    /// The goal-gap block, memoized on the (goal, look) pair.
    pub fn gap_block(&mut self, look: &str, goal: &str) -> Arc<SparseVec> {
        let key = format!("{goal}\u{1f}{look}");
        let map = &mut self.blocks[Channel::GoalGap as usize];
        if let Some(b) = map.get(key.as_str()) {
            return b.clone();
        }
        if map.len() >= self.cap {
            map.clear();
        }
        let block = Arc::new(self.encoder.encode_gap(look, goal));
        map.insert(Arc::from(key), block.clone());
        block
    }

    fn state_blocks(&mut self, obs: &str, look: &str, inv: &str, goal: &str) -> [Arc<SparseVec>; 5] {
        [
            self.block(Channel::Obs, obs),
            self.block(Channel::Look, look),
            self.block(Channel::Inv, inv),
            self.block(Channel::Goal, goal),
            self.gap_block(look, goal),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QModel {
    encoder: HashedEncoder,
    hidden: usize,
    /// Seed and half-width of the uniform initial `W` entries.
    init_seed: u64,
    init_scale: f64,
    w: FxHashMap<u32, Box<[f64]>>,
    b1: Vec<f64>,
    v: Vec<f64>,
    b2: f64,
    adam: Option<Box<AdamState>>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    encoder: HashedEncoder,
    hidden: usize,
    init_seed: u64,
    init_scale: f64,
    b1: Vec<f64>,
    v: Vec<f64>,
    b2: f64,
    rows: Vec<(u32, Vec<f64>)>,
}

/// Scores of every candidate action in one state, with what the backward
/// pass needs.
struct Scored {
    hs: Vec<f64>,
    /// Index into the per-update action table, per candidate.
    actions: Vec<usize>,
    q: Vec<f64>,
}

impl QModel {
    /// Output weights uniform in ±1/√hidden, `W` uniform in
    /// ±`DEFAULT_INIT_SCALE`, hidden biases 0.1 and `b2` zero.
    pub fn new(encoder: HashedEncoder, hidden: usize, seed: u64) -> Self {
        Self::with_init_scale(encoder, hidden, seed, DEFAULT_INIT_SCALE)
    }

    pub fn with_init_scale(encoder: HashedEncoder, hidden: usize, seed: u64, init_scale: f64) -> Self {
        assert!(hidden > 0, "hidden layer must be non-empty");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (hidden as f64).sqrt();
        let v = (0..hidden).map(|_| rng.gen_range(-bound..bound)).collect();
        Self {
            encoder,
            hidden,
            init_seed: seed,
            init_scale,
            w: FxHashMap::default(),
            b1: vec![0.1; hidden],
            v,
            b2: 0.0,
            adam: None,
        }
    }

    /// All-zero parameters: every score is 0.
    pub fn zeros(encoder: HashedEncoder, hidden: usize) -> Self {
        assert!(hidden > 0, "hidden layer must be non-empty");
        Self {
            encoder,
            hidden,
            init_seed: 0,
            init_scale: 0.0,
            w: FxHashMap::default(),
            b1: vec![0.0; hidden],
            v: vec![0.0; hidden],
            b2: 0.0,
            adam: None,
        }
    }

    /// Initial value of `W[i][j]`.
    fn init_weight(&self, i: u32, j: usize) -> f64 {
        if self.init_scale == 0.0 {
            return 0.0;
        }
        let key = (u64::from(i) << 20) ^ j as u64;
        let bits = splitmix64(self.init_seed ^ splitmix64(key));
        // 53 random bits to [0, 1), then to [-scale, scale).
        let unit = (bits >> 11) as f64 / (1u64 << 53) as f64;
        self.init_scale * (2.0 * unit - 1.0)
    }

    fn init_row(&self, i: u32) -> Box<[f64]> {
        (0..self.hidden).map(|j| self.init_weight(i, j)).collect()
    }

    pub fn encoder(&self) -> HashedEncoder {
        self.encoder
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    /// Number of materialized scalar parameters.
    pub fn param_count(&self) -> usize {
        self.w.len() * self.hidden + 2 * self.hidden + 1
    }

    pub fn param(&self, p: ParamRef) -> f64 {
        match p {
            ParamRef::W(i, j) => self.w.get(&i).map_or_else(|| self.init_weight(i, j), |r| r[j]),
            ParamRef::B1(j) => self.b1[j],
            ParamRef::V(j) => self.v[j],
            ParamRef::B2 => self.b2,
        }
    }

    pub fn set_param(&mut self, p: ParamRef, x: f64) {
        match p {
            ParamRef::W(i, j) => self.row_mut(i)[j] = x,
            ParamRef::B1(j) => self.b1[j] = x,
            ParamRef::V(j) => self.v[j] = x,
            ParamRef::B2 => self.b2 = x,
        }
    }

    fn row_mut(&mut self, i: u32) -> &mut [f64] {
        if !self.w.contains_key(&i) {
            let row = self.init_row(i);
            self.w.insert(i, row);
        }
        self.w.get_mut(&i).expect("row inserted above")
    }

    fn accumulate(&self, h: &mut [f64], x: &[(u32, f64)]) {
        for (i, xv) in x {
            match self.w.get(i) {
                Some(row) => {
                    for (hj, wj) in h.iter_mut().zip(row.iter()) {
                        *hj += xv * wj;
                    }
                }
                None if self.init_scale != 0.0 => {
                    for (j, hj) in h.iter_mut().enumerate() {
                        *hj += xv * self.init_weight(*i, j);
                    }
                }
                None => {}
            }
        }
    }

    fn project(&self, blocks: &[Arc<SparseVec>]) -> Vec<f64> {
        let mut h = vec![0.0; self.hidden];
        for b in blocks {
            self.accumulate(&mut h, b);
        }
        h
    }

    /// State projection plus the hidden bias.
    fn project_state(&self, blocks: &[Arc<SparseVec>]) -> Vec<f64> {
        let mut h = self.project(blocks);
        for (hj, bj) in h.iter_mut().zip(&self.b1) {
            *hj += bj;
        }
        h
    }

    /// `hs` includes the hidden bias (see `project_state`).
    fn q_of(&self, hs: &[f64], ha: &[f64]) -> f64 {
        let mut q = self.b2;
        for ((s, a), v) in hs.iter().zip(ha).zip(&self.v) {
            let pre = s + a;
            if pre > 0.0 {
                q += v * pre;
            }
        }
        q
    }

    /// Scores for every candidate action, in input order.
    pub fn q_values<S: AsRef<str>>(
        &self,
        cache: &mut FeatureCache,
        obs: &str,
        look: &str,
        inv: &str,
        goal: &str,
        actions: &[S],
    ) -> Vec<f64> {
        let hs = self.project_state(&cache.state_blocks(obs, look, inv, goal));
        actions
            .iter()
            .map(|a| {
                let ha = self.project(&[cache.block(Channel::Action, a.as_ref())]);
                self.q_of(&hs, &ha)
            })
            .collect()
    }

    /// Bootstrap targets `r + γ·max Q(s', ·)` under the current parameters,
    /// with no bootstrap when the goal was reached (`r = 1`) or the
    /// transition ends its trajectory.
    pub fn compute_targets(&self, cache: &mut FeatureCache, batch: &[Sample], gamma: f64) -> Vec<f64> {
        let mut table = ActionTable::default();
        batch
            .iter()
            .map(|s| {
                let r = f64::from(s.reward);
                let t = &s.transition;
                if s.reward == 1 || t.terminal {
                    return r;
                }
                let next = self.score(
                    cache,
                    &mut table,
                    &t.next_obs,
                    &t.next_look,
                    &t.next_inv,
                    &s.goal,
                    &t.next_valid_actions,
                );
                r + gamma * next.q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    fn score(
        &self,
        cache: &mut FeatureCache,
        table: &mut ActionTable,
        obs: &str,
        look: &str,
        inv: &str,
        goal: &str,
        actions: &[Arc<str>],
    ) -> Scored {
        let hs = self.project_state(&cache.state_blocks(obs, look, inv, goal));
        let actions: Vec<usize> = actions.iter().map(|a| table.id(self, cache, a)).collect();
        let q = actions.iter().map(|k| self.q_of(&hs, &table.emb[*k])).collect();
        Scored { hs, actions, q }
    }

    /// Loss and gradient with the given (constant) targets.
    pub fn loss_and_gradient_with_targets(
        &self,
        cache: &mut FeatureCache,
        batch: &[Sample],
        targets: &[f64],
        cfg: &LearnConfig,
    ) -> (LossBreakdown, Gradient) {
        assert_eq!(batch.len(), targets.len());
        let n = batch.len() as f64;
        let mut grad = Gradient::zeros(self.hidden);
        let mut table = ActionTable::default();
        let mut d_emb: FxHashMap<usize, Vec<f64>> = FxHashMap::default();
        let (mut td_sum, mut ent_sum) = (0.0, 0.0);
        for (s, target) in batch.iter().zip(targets) {
            let t = &s.transition;
            let mut sc = self.score(cache, &mut table, &t.obs, &t.look, &t.inv, &s.goal, &t.valid_actions);
            let pos = match t.valid_actions.iter().position(|a| *a == t.action) {
                Some(p) => p,
                None => {
                    // An action outside A_t (possible in hand-built data): score it
                    // but keep it out of the entropy term.
                    let k = table.id(self, cache, &t.action);
                    sc.q.push(self.q_of(&sc.hs, &table.emb[k]));
                    sc.actions.push(k);
                    sc.q.len() - 1
                }
            };
            let n_valid = t.valid_actions.len();
            let qa = sc.q[pos];
            td_sum += smooth_l1(qa, *target);
            let (ent, ent_grad) = normalized_entropy_grad(&sc.q[..n_valid], cfg.temperature);
            ent_sum += ent;

            let mut g = vec![0.0; sc.q.len()];
            if cfg.lambda_h != 0.0 {
                for (gk, eg) in g.iter_mut().zip(&ent_grad) {
                    *gk = cfg.lambda_h * eg / n;
                }
            }
            g[pos] += smooth_l1_grad(qa, *target) / n;

            let mut d_hs = vec![0.0; self.hidden];
            for (k, gk) in g.iter().enumerate() {
                if *gk == 0.0 {
                    continue;
                }
                let a = sc.actions[k];
                let ha = &table.emb[a];
                let da = d_emb.entry(a).or_insert_with(|| vec![0.0; self.hidden]);
                grad.b2 += gk;
                let lanes = sc.hs.iter().zip(ha).zip(&self.v).zip(grad.v.iter_mut().zip(&mut grad.b1));
                for ((((s, a), v), (gv, gb1)), (dh, dae)) in lanes.zip(d_hs.iter_mut().zip(da.iter_mut())) {
                    let pre = s + a;
                    if pre > 0.0 {
                        *gv += gk * pre;
                        let dp = gk * v;
                        *gb1 += dp;
                        *dh += dp;
                        *dae += dp;
                    }
                }
            }
            for block in cache.state_blocks(&t.obs, &t.look, &t.inv, &s.goal) {
                scatter(&mut grad.w, &block, &d_hs, self.hidden);
            }
        }
        let mut keys: Vec<usize> = d_emb.keys().copied().collect();
        keys.sort_unstable();
        for k in keys {
            scatter(&mut grad.w, &table.features[k], &d_emb[&k], self.hidden);
        }
        let td_term = td_sum / n;
        let entropy_term = ent_sum / n;
        let loss = LossBreakdown {
            td_term,
            entropy_term,
            total: td_term + cfg.lambda_h * entropy_term,
            batch_size: batch.len(),
        };
        (loss, grad)
    }

    /// Losses at the current parameters (targets from the same parameters).
    pub fn loss(&self, cache: &mut FeatureCache, batch: &[Sample], cfg: &LearnConfig) -> LossBreakdown {
        let targets = self.compute_targets(cache, batch, cfg.gamma);
        self.loss_and_gradient_with_targets(cache, batch, &targets, cfg).0
    }

    /// One clipped gradient step. Returns the pre-step losses; on a
    /// non-finite loss or gradient the parameters are left unchanged.
    pub fn update(
        &mut self,
        cache: &mut FeatureCache,
        batch: &[Sample],
        cfg: &LearnConfig,
    ) -> Result<LossBreakdown, QPolicyError> {
        if batch.is_empty() {
            return Err(QPolicyError::EmptyBatch);
        }
        let targets = self.compute_targets(cache, batch, cfg.gamma);
        let (loss, mut grad) = self.loss_and_gradient_with_targets(cache, batch, &targets, cfg);
        if !loss.total.is_finite() || !grad.is_finite() {
            return Err(QPolicyError::NonFinite(format!(
                "td {} entropy {} total {}",
                loss.td_term, loss.entropy_term, loss.total
            )));
        }
        let norm = grad.norm();
        let scale = if norm > cfg.clip_norm { cfg.clip_norm / norm } else { 1.0 };
        if cfg.learning_rate == 0.0 {
            return Ok(loss);
        }
        if cfg.optimizer == Optimizer::Adam {
            self.adam_step(grad, scale, cfg.learning_rate);
            return Ok(loss);
        }
        let step = cfg.learning_rate * scale;
        for (i, row) in grad.w.drain() {
            let dst = self.row_mut(i);
            for (p, g) in dst.iter_mut().zip(row) {
                *p -= step * g;
            }
        }
        for (p, g) in self.b1.iter_mut().zip(&grad.b1) {
            *p -= step * g;
        }
        for (p, g) in self.v.iter_mut().zip(&grad.v) {
            *p -= step * g;
        }
        self.b2 -= step * grad.b2;
        Ok(loss)
    }

    fn adam_step(&mut self, mut grad: Gradient, scale: f64, lr: f64) {
        let h = self.hidden;
        let mut state = self.adam.take().unwrap_or_else(|| {
            Box::new(AdamState { b1: Moments::new(h), v: Moments::new(h), b2: Moments::new(1), ..AdamState::default() })
        });
        state.t += 1;
        let lr_t = lr * (1.0 - ADAM_BETA2.powi(state.t)).sqrt() / (1.0 - ADAM_BETA1.powi(state.t));
        let scaled = |g: &mut [f64]| g.iter_mut().for_each(|x| *x *= scale);
        let mut rows: Vec<(u32, Vec<f64>)> = grad.w.drain().collect();
        rows.sort_unstable_by_key(|(i, _)| *i);
        for (i, mut g) in rows {
            scaled(&mut g);
            let moments = state.w.entry(i).or_insert_with(|| Moments::new(h));
            moments.step(self.row_mut(i), &g, lr_t);
        }
        scaled(&mut grad.b1);
        scaled(&mut grad.v);
        state.b1.step(&mut self.b1, &grad.b1, lr_t);
        state.v.step(&mut self.v, &grad.v, lr_t);
        let mut b2 = [self.b2];
        state.b2.step(&mut b2, &[grad.b2 * scale], lr_t);
        self.b2 = b2[0];
        self.adam = Some(state);
    }

    pub fn write_checkpoint<W: Write>(&self, mut out: W) -> Result<(), QPolicyError> {
        let mut rows: Vec<(u32, Vec<f64>)> = self.w.iter().map(|(i, r)| (*i, r.to_vec())).collect();
        rows.sort_by_key(|(i, _)| *i);
        let file = CheckpointFile {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            encoder: self.encoder,
            hidden: self.hidden,
            init_seed: self.init_seed,
            init_scale: self.init_scale,
            b1: self.b1.clone(),
            v: self.v.clone(),
            b2: self.b2,
            rows,
        };
        serde_json::to_writer(&mut out, &file).map_err(|e| QPolicyError::Checkpoint(e.to_string()))?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_checkpoint<R: BufRead>(input: R) -> Result<Self, QPolicyError> {
        let file: CheckpointFile =
            serde_json::from_reader(input).map_err(|e| QPolicyError::Checkpoint(e.to_string()))?;
        if file.format != CHECKPOINT_FORMAT || file.version != CHECKPOINT_VERSION {
            return Err(QPolicyError::Checkpoint(format!("unsupported checkpoint {} v{}", file.format, file.version)));
        }
        let h = file.hidden;
        if h == 0 || file.b1.len() != h || file.v.len() != h || file.rows.iter().any(|(_, r)| r.len() != h) {
            return Err(QPolicyError::Checkpoint("parameter shapes disagree".into()));
        }
        let w = file.rows.into_iter().map(|(i, r)| (i, r.into_boxed_slice())).collect();
        Ok(Self {
            encoder: file.encoder,
            hidden: h,
            init_seed: file.init_seed,
            init_scale: file.init_scale,
            w,
            b1: file.b1,
            v: file.v,
            b2: file.b2,
            adam: None,
        })
    }
}

/// Half-width of the uniform initial `W` entries: with unit-norm channel
/// blocks, pre-activations start with a standard deviation near 0.5.
pub const DEFAULT_INIT_SCALE: f64 = 0.4;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn scatter(w: &mut FxHashMap<u32, Vec<f64>>, x: &[(u32, f64)], d: &[f64], hidden: usize) {
    for (i, xv) in x {
        let row = w.entry(*i).or_insert_with(|| vec![0.0; hidden]);
        for (r, dj) in row.iter_mut().zip(d) {
            *r += xv * dj;
        }
    }
}

/// Distinct action texts seen during one forward/backward pass, with their
/// features and hidden-layer projections.
#[derive(Default)]
struct ActionTable {
    ids: FxHashMap<Arc<str>, usize>,
    features: Vec<Arc<SparseVec>>,
    emb: Vec<Vec<f64>>,
}

impl ActionTable {
    fn id(&mut self, model: &QModel, cache: &mut FeatureCache, action: &Arc<str>) -> usize {
        if let Some(k) = self.ids.get(action) {
            return *k;
        }
        let f = cache.block(Channel::Action, action);
        self.emb.push(model.project(std::slice::from_ref(&f)));
        self.features.push(f);
        self.ids.insert(action.clone(), self.emb.len() - 1);
        self.emb.len() - 1
    }
}
