//! Goal-modular trajectory replay.
//!
//! Each stored trajectory keeps the goals it achieved (positive examples) and
//! the goals it targeted without achieving them (negative examples). Sampling
//! is multi-step: pick a goal by weight, then a positive or negative
//! trajectory for it (0.5/0.5), then, in a positive trajectory, a rewarded or
//! unrewarded transition (0.5/0.5). A flat FIFO of transitions is provided
//! for agents that get no relabeling at all.

mod snapshot;

use std::collections::VecDeque;
use std::sync::Arc;

use indexmap::IndexMap;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::goals::{reward_text, Goal, GoalSet};

pub use snapshot::{load_snapshot, write_snapshot, SNAPSHOT_FORMAT, SNAPSHOT_VERSION};

/// Default number of trajectories kept before FIFO eviction.
pub const DEFAULT_CAPACITY: usize = 20_000;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("invalid trajectory record: {0}")]
    InvalidRecord(String),
    #[error("no weight given for indexed goal `{0}`")]
    MissingWeight(String),
    #[error("replay snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The three text channels and the valid actions at one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepView {
    pub obs: Arc<str>,
    pub look: Arc<str>,
    pub inv: Arc<str>,
    pub valid_actions: Arc<[Arc<str>]>,
}

/// One transition, as handed to the learner.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Arc<str>,
    pub look: Arc<str>,
    pub inv: Arc<str>,
    pub action: Arc<str>,
    /// Reward for the goal this transition was sampled for.
    pub reward: u8,
    pub next_obs: Arc<str>,
    pub next_look: Arc<str>,
    pub next_inv: Arc<str>,
    pub valid_actions: Arc<[Arc<str>]>,
    pub next_valid_actions: Arc<[Arc<str>]>,
    /// Last transition of its trajectory.
    pub terminal: bool,
}

/// Where in the run a trajectory was collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EpisodeMeta {
    pub seed: u64,
    /// Environment step count when the trajectory started.
    pub step_index: u64,
}

/// A finished trajectory with its relabeled and targeted goals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    /// `actions.len() + 1` steps: the start state and the state after each action.
    steps: Vec<StepView>,
    actions: Vec<Arc<str>>,
    /// Goals pursued during the trajectory (one per goal-chain segment).
    targeted: Vec<Arc<str>>,
    relabeled: Vec<Arc<str>>,
    /// Per-transition reward (next look against the goal) for every
    /// relabeled or targeted goal.
    rewards: IndexMap<Arc<str>, Vec<u8>>,
    pub meta: EpisodeMeta,
}

impl TrajectoryRecord {
    /// Builds a record and precomputes per-goal rewards. Fails if the shapes
    /// disagree, a valid-action list is empty, or a relabeled goal is never
    /// achieved.
    pub fn new(
        steps: Vec<StepView>,
        actions: Vec<Arc<str>>,
        targeted: &[Goal],
        relabeled: &GoalSet,
        meta: EpisodeMeta,
    ) -> Result<Self, ReplayError> {
        let invalid = |m: String| Err(ReplayError::InvalidRecord(m));
        if actions.is_empty() {
            return invalid("no transitions".into());
        }
        if steps.len() != actions.len() + 1 {
            return invalid(format!("{} steps for {} actions", steps.len(), actions.len()));
        }
        if let Some(t) = steps.iter().position(|s| s.valid_actions.is_empty()) {
            return invalid(format!("empty valid-action list at step {t}"));
        }
        let mut rewards: IndexMap<Arc<str>, Vec<u8>> = IndexMap::new();
        let goals = relabeled.iter().map(|g| g.text_arc().clone()).chain(targeted.iter().map(|g| g.text_arc().clone()));
        for g in goals {
            if !rewards.contains_key(&g) {
                let v = steps[1..].iter().map(|s| reward_text(&s.look, &g)).collect();
                rewards.insert(g, v);
            }
        }
        let relabeled: Vec<Arc<str>> = relabeled.iter().map(|g| g.text_arc().clone()).collect();
        for g in &relabeled {
            if !rewards[g].contains(&1) {
                return invalid(format!("relabeled goal `{g}` is never achieved"));
            }
        }
        let mut targeted_texts: Vec<Arc<str>> = Vec::new();
        for g in targeted {
            if !targeted_texts.contains(g.text_arc()) {
                targeted_texts.push(g.text_arc().clone());
            }
        }
        Ok(Self { steps, actions, targeted: targeted_texts, relabeled, rewards, meta })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn relabeled(&self) -> &[Arc<str>] {
        &self.relabeled
    }

    pub fn targeted(&self) -> &[Arc<str>] {
        &self.targeted
    }

    /// Targeted goals that were not achieved: negative examples.
    pub fn negatives(&self) -> impl Iterator<Item = &Arc<str>> {
        self.targeted.iter().filter(|g| !self.relabeled.contains(g))
    }

    pub fn rewards(&self, goal: &str) -> Option<&[u8]> {
        self.rewards.get(goal).map(Vec::as_slice)
    }

    pub fn steps(&self) -> &[StepView] {
        &self.steps
    }

    pub fn actions(&self) -> &[Arc<str>] {
        &self.actions
    }

    /// Transition `t` with the reward for `goal` (0 if the goal is not tracked).
    pub fn transition(&self, t: usize, goal: &str) -> Transition {
        let (s, n) = (&self.steps[t], &self.steps[t + 1]);
        Transition {
            obs: s.obs.clone(),
            look: s.look.clone(),
            inv: s.inv.clone(),
            action: self.actions[t].clone(),
            reward: self.rewards(goal).map_or(0, |r| r[t]),
            next_obs: n.obs.clone(),
            next_look: n.look.clone(),
            next_inv: n.inv.clone(),
            valid_actions: s.valid_actions.clone(),
            next_valid_actions: n.valid_actions.clone(),
            terminal: t + 1 == self.actions.len(),
        }
    }

    fn validate(&self) -> Result<(), ReplayError> {
        let invalid = |m: &str| Err(ReplayError::InvalidRecord(m.to_string()));
        if self.actions.is_empty() || self.steps.len() != self.actions.len() + 1 {
            return invalid("shape mismatch");
        }
        if self.steps.iter().any(|s| s.valid_actions.is_empty()) {
            return invalid("empty valid-action list");
        }
        for g in self.relabeled.iter().chain(&self.targeted) {
            match self.rewards.get(g) {
                Some(r) if r.len() == self.actions.len() => {}
                _ => return invalid("reward vector missing or of wrong length"),
            }
        }
        if self.relabeled.iter().any(|g| !self.rewards[g].contains(&1)) {
            return invalid("relabeled goal never achieved");
        }
        Ok(())
    }
}

/// Index entry for one goal.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GoalEntry {
    /// Ids of trajectories that achieved the goal, oldest first.
    pub positive: VecDeque<u64>,
    /// Ids of trajectories that targeted the goal without achieving it.
    pub negative: VecDeque<u64>,
    /// Transitions in the positive trajectories.
    pub transitions: usize,
}

pub type GoalIndex = IndexMap<Arc<str>, GoalEntry>;

/// How goals are weighted when sampling replay batches.
#[derive(Debug, Clone, Copy)]
pub enum WeightMode<'a> {
    Uniform,
    /// Proportional to the transitions in the goal's positive trajectories.
    TransitionProportional,
    /// Externally supplied (e.g. competence-based) weights.
    External(&'a IndexMap<Arc<str>, f64>),
}

/// One sampled (transition, goal, reward) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub transition: Transition,
    pub goal: Arc<str>,
    pub reward: u8,
    /// Whether the trajectory was drawn as a positive example.
    pub positive: bool,
}

/// A goal distribution prepared for repeated batch sampling.
#[derive(Debug, Clone)]
pub struct GoalSampler {
    goals: Vec<Arc<str>>,
    dist: WeightedIndex<f64>,
}

/// Goal-modular FIFO buffer of trajectories.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    records: VecDeque<Arc<TrajectoryRecord>>,
    /// Id of `records[0]`; ids are consecutive.
    first_id: u64,
    index: GoalIndex,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { capacity, records: VecDeque::new(), first_id: 0, index: GoalIndex::new() }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn index(&self) -> &GoalIndex {
        &self.index
    }

    pub fn transition_count(&self) -> usize {
        self.records.iter().map(|r| r.len()).sum()
    }

    pub fn get(&self, id: u64) -> Option<&Arc<TrajectoryRecord>> {
        let pos = id.checked_sub(self.first_id)?;
        self.records.get(usize::try_from(pos).ok()?)
    }

    /// Records with their ids, oldest first.
    pub fn records(&self) -> impl Iterator<Item = (u64, &Arc<TrajectoryRecord>)> {
        self.records.iter().enumerate().map(move |(i, r)| (self.first_id + i as u64, r))
    }

    /// Stores `record` under a fresh id, evicting the oldest past capacity.
    pub fn push(&mut self, record: TrajectoryRecord) -> Result<u64, ReplayError> {
        record.validate()?;
        let id = self.first_id + self.records.len() as u64;
        index_record(&mut self.index, id, &record);
        self.records.push_back(Arc::new(record));
        while self.records.len() > self.capacity {
            self.evict_oldest();
        }
        Ok(id)
    }

    fn evict_oldest(&mut self) {
        let record = self.records.pop_front().expect("non-empty when evicting");
        let id = self.first_id;
        self.first_id += 1;
        let mut emptied = Vec::new();
        for g in record.relabeled() {
            let entry = self.index.get_mut(g).expect("indexed goal");
            debug_assert_eq!(entry.positive.front(), Some(&id));
            entry.positive.pop_front();
            entry.transitions -= record.len();
            if entry.positive.is_empty() && entry.negative.is_empty() {
                emptied.push(g.clone());
            }
        }
        for g in record.negatives() {
            let entry = self.index.get_mut(g).expect("indexed goal");
            debug_assert_eq!(entry.negative.front(), Some(&id));
            entry.negative.pop_front();
            if entry.positive.is_empty() && entry.negative.is_empty() {
                emptied.push(g.clone());
            }
        }
        for g in emptied {
            self.index.shift_remove(&g);
        }
    }

    /// Rebuilds the index from the stored records (test oracle).
    pub fn rebuild_index(&self) -> GoalIndex {
        let mut index = GoalIndex::new();
        for (id, r) in self.records() {
            index_record(&mut index, id, r);
        }
        index
    }

    /// Normalized goal weights over the indexed goals.
    pub fn goal_weights(&self, mode: WeightMode<'_>) -> Result<IndexMap<Arc<str>, f64>, ReplayError> {
        goal_weights(mode, &self.index)
    }

    /// Draws `n` samples by the multi-step rule. Returns an empty batch when
    /// the buffer is empty or all weights are zero.
    pub fn sample_batch<R: Rng>(&self, n: usize, weights: &IndexMap<Arc<str>, f64>, rng: &mut R) -> Vec<Sample> {
        match self.goal_sampler(weights) {
            Some(sampler) => self.sample_with(&sampler, n, rng),
            None => Vec::new(),
        }
    }

    /// Prepares the goal distribution of `weights` over the indexed goals for
    /// repeated use; valid until the buffer changes. `None` when no indexed
    /// goal has positive weight.
    pub fn goal_sampler(&self, weights: &IndexMap<Arc<str>, f64>) -> Option<GoalSampler> {
        let (goals, w): (Vec<Arc<str>>, Vec<f64>) =
            self.index.keys().filter_map(|g| weights.get(g).map(|w| (g.clone(), *w))).filter(|(_, w)| *w > 0.0).unzip();
        if goals.is_empty() {
            return None;
        }
        let dist = WeightedIndex::new(w).expect("positive weights");
        Some(GoalSampler { goals, dist })
    }

    /// Draws `n` samples with a prepared goal distribution.
    pub fn sample_with<R: Rng>(&self, sampler: &GoalSampler, n: usize, rng: &mut R) -> Vec<Sample> {
        (0..n)
            .map(|_| {
                let goal = &sampler.goals[sampler.dist.sample(rng)];
                let entry = self.index.get(goal).expect("sampler built from the current index");
                self.sample_for_goal(goal, entry, rng)
            })
            .collect()
    }

    fn sample_for_goal<R: Rng>(&self, goal: &Arc<str>, entry: &GoalEntry, rng: &mut R) -> Sample {
        let positive = match (entry.positive.is_empty(), entry.negative.is_empty()) {
            (false, false) => rng.gen::<f64>() < 0.5,
            (false, true) => true,
            (true, false) => false,
            (true, true) => unreachable!("empty index entries are removed"),
        };
        let ids = if positive { &entry.positive } else { &entry.negative };
        let id = ids[rng.gen_range(0..ids.len())];
        let record = self.get(id).expect("indexed id is stored");
        let rewards = record.rewards(goal).expect("indexed goal has rewards");
        let t = if positive {
            let rewarded = rewards.iter().filter(|r| **r == 1).count();
            let unrewarded = rewards.len() - rewarded;
            let want_reward = match (rewarded, unrewarded) {
                (0, _) => false,
                (_, 0) => true,
                _ => rng.gen::<f64>() < 0.5,
            };
            let count = if want_reward { rewarded } else { unrewarded };
            let k = rng.gen_range(0..count);
            nth_with_reward(rewards, want_reward as u8, k)
        } else {
            rng.gen_range(0..record.len())
        };
        let transition = record.transition(t, goal);
        let reward = transition.reward;
        Sample { transition, goal: goal.clone(), reward, positive }
    }
}

fn nth_with_reward(rewards: &[u8], value: u8, k: usize) -> usize {
    rewards.iter().enumerate().filter(|(_, r)| **r == value).nth(k).map(|(i, _)| i).expect("k below count")
}

fn index_record(index: &mut GoalIndex, id: u64, record: &TrajectoryRecord) {
    for g in record.relabeled() {
        let entry = index.entry(g.clone()).or_default();
        entry.positive.push_back(id);
        entry.transitions += record.len();
    }
    for g in record.negatives() {
        index.entry(g.clone()).or_default().negative.push_back(id);
    }
}

/// Normalized weights over the goals of `index`.
pub fn goal_weights(mode: WeightMode<'_>, index: &GoalIndex) -> Result<IndexMap<Arc<str>, f64>, ReplayError> {
    let raw: IndexMap<Arc<str>, f64> = match mode {
        WeightMode::Uniform => index.keys().map(|g| (g.clone(), 1.0)).collect(),
        WeightMode::TransitionProportional => index.iter().map(|(g, e)| (g.clone(), e.transitions as f64)).collect(),
        WeightMode::External(map) => index
            .keys()
            .map(|g| match map.get(g) {
                Some(w) if w.is_finite() && *w >= 0.0 => Ok((g.clone(), *w)),
                _ => Err(ReplayError::MissingWeight(g.to_string())),
            })
            .collect::<Result<_, _>>()?,
    };
    let total: f64 = raw.values().sum();
    if total <= 0.0 {
        return Ok(raw.into_iter().map(|(g, _)| (g, 0.0)).collect());
    }
    Ok(raw.into_iter().map(|(g, w)| (g, w / total)).collect())
}

/// Flat FIFO of transitions, sampled uniformly (no goal structure).
#[derive(Debug, Clone)]
pub struct TransitionBuffer {
    capacity: usize,
    items: VecDeque<(Transition, Arc<str>)>,
}

impl TransitionBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { capacity, items: VecDeque::new() }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Adds the transitions of `record`, each paired with the goal that was
    /// being pursued at that step; steps without a goal are skipped.
    pub fn push_trajectory(&mut self, record: &TrajectoryRecord, goal_per_step: &[Option<Arc<str>>]) {
        assert_eq!(goal_per_step.len(), record.len(), "one goal per transition");
        for (t, g) in goal_per_step.iter().enumerate() {
            let Some(g) = g else { continue };
            self.items.push_back((record.transition(t, g), g.clone()));
            if self.items.len() > self.capacity {
                self.items.pop_front();
            }
        }
    }

    pub fn sample_batch<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<Sample> {
        if self.items.is_empty() {
            return Vec::new();
        }
        (0..n)
            .map(|_| {
                let (t, g) = &self.items[rng.gen_range(0..self.items.len())];
                Sample { transition: t.clone(), goal: g.clone(), reward: t.reward, positive: t.reward == 1 }
            })
            .collect()
    }
}
