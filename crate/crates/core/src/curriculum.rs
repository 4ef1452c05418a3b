//! Per-goal competence tracking and episode goal sampling.
//!
//! Competence is the success fraction over a goal's last `W` attempts.
//! Goals are drawn uniformly, by intermediate competence
//! (`w = α·exp(−(c−0.5)²/(2σ²)) + β`), by difficulty (`w = 1 − c + ε`), or
//! uniformly from a fixed extrinsic list.

use std::collections::VecDeque;
use std::sync::Arc;

use indexmap::IndexMap;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::goals::{Goal, GoalSet};

/// Attempts remembered per goal.
pub const DEFAULT_WINDOW: usize = 50;

#[derive(Debug, Error, PartialEq)]
pub enum CurriculumError {
    #[error("invalid sampler parameters: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompetenceRecord {
    outcomes: VecDeque<bool>,
    attempts: u64,
}

impl CompetenceRecord {
    pub fn attempts(&self) -> u64 {
        self.attempts
    }

    pub fn stored(&self) -> usize {
        self.outcomes.len()
    }

    /// Success fraction over the stored outcomes; 0 before any attempt.
    pub fn competence(&self) -> f64 {
        if self.outcomes.is_empty() {
            return 0.0;
        }
        self.outcomes.iter().filter(|o| **o).count() as f64 / self.outcomes.len() as f64
    }
}

/// Competence records of all attempted goals.
#[derive(Debug, Clone, PartialEq)]
pub struct CompetenceBook {
    window: usize,
    records: IndexMap<Arc<str>, CompetenceRecord>,
}

impl Default for CompetenceBook {
    fn default() -> Self {
        Self::new(DEFAULT_WINDOW)
    }
}

impl CompetenceBook {
    pub fn new(window: usize) -> Self {
        assert!(window > 0, "competence window must be positive");
        Self { window, records: IndexMap::new() }
    }

    pub fn record_attempt(&mut self, goal: &str, success: bool) {
        let window = self.window;
        let rec = match self.records.get_mut(goal) {
            Some(r) => r,
            None => self
                .records
                .entry(Arc::from(goal))
                .or_insert(CompetenceRecord { outcomes: VecDeque::with_capacity(window), attempts: 0 }),
        };
        if rec.outcomes.len() == window {
            rec.outcomes.pop_front();
        }
        rec.outcomes.push_back(success);
        rec.attempts += 1;
    }

    pub fn record(&self, goal: &str) -> Option<&CompetenceRecord> {
        self.records.get(goal)
    }

    /// Competence of `goal`; 0 for goals never attempted.
    pub fn competence(&self, goal: &str) -> f64 {
        self.records.get(goal).map_or(0.0, CompetenceRecord::competence)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Arc<str>, &CompetenceRecord)> {
        self.records.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerMode {
    Uniform,
    Intermediate,
    Difficulty,
    Extrinsic,
}

/// Sign of the exponent in the intermediate-competence weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentSign {
    /// `exp(−(c−0.5)²/(2σ²))`: peaks at c = 0.5.
    #[default]
    Bump,
    /// `exp(+(c−0.5)²/(2σ²))`: smallest at c = 0.5.
    Dip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub mode: SamplerMode,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub sign: ExponentSign,
    /// Floor added to `1 − c` in difficulty mode.
    pub difficulty_eps: f64,
    /// Goal list for extrinsic mode.
    #[serde(skip)]
    pub extrinsic: Option<GoalSet>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            mode: SamplerMode::Uniform,
            alpha: 1.0,
            beta: 0.2,
            sigma: 0.25,
            sign: ExponentSign::Bump,
            difficulty_eps: 0.05,
            extrinsic: None,
        }
    }
}

impl SamplerConfig {
    pub fn with_mode(mode: SamplerMode) -> Self {
        Self { mode, ..Self::default() }
    }

    pub fn extrinsic(goals: GoalSet) -> Self {
        Self { mode: SamplerMode::Extrinsic, extrinsic: Some(goals), ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), CurriculumError> {
        let bad = |m: &str| Err(CurriculumError::InvalidConfig(m.to_string()));
        if !(self.alpha > 0.0) {
            return bad("alpha must be positive");
        }
        if !(self.beta >= 0.0) {
            return bad("beta must be non-negative");
        }
        if !(self.sigma > 0.0) {
            return bad("sigma must be positive");
        }
        if !(self.difficulty_eps > 0.0) {
            return bad("difficulty epsilon must be positive");
        }
        if self.mode == SamplerMode::Extrinsic && self.extrinsic.as_ref().map_or(true, GoalSet::is_empty) {
            return bad("extrinsic mode needs a non-empty goal list");
        }
        Ok(())
    }

    /// Sampling weight of a goal with competence `c` in this mode.
    pub fn goal_weight(&self, c: f64) -> f64 {
        match self.mode {
            SamplerMode::Uniform | SamplerMode::Extrinsic => 1.0,
            SamplerMode::Intermediate => weight(c, self),
            SamplerMode::Difficulty => 1.0 - c + self.difficulty_eps,
        }
    }
}

/// Intermediate-competence weight `α·exp(∓(c−0.5)²/(2σ²)) + β`.
pub fn weight(c: f64, cfg: &SamplerConfig) -> f64 {
    let e = (c - 0.5).powi(2) / (2.0 * cfg.sigma * cfg.sigma);
    let e = match cfg.sign {
        ExponentSign::Bump => -e,
        ExponentSign::Dip => e,
    };
    cfg.alpha * e.exp() + cfg.beta
}

/// Draws the next episode goal: from the extrinsic list in extrinsic mode,
/// otherwise from `discovered` by the mode's weights. `None` when there is
/// nothing to draw from yet.
pub fn sample_goal<R: Rng>(
    discovered: &GoalSet,
    book: &CompetenceBook,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Option<Goal> {
    let candidates = match (cfg.mode, &cfg.extrinsic) {
        (SamplerMode::Extrinsic, Some(list)) => list,
        _ => discovered,
    };
    if candidates.is_empty() {
        return None;
    }
    let i = match cfg.mode {
        SamplerMode::Uniform | SamplerMode::Extrinsic => rng.gen_range(0..candidates.len()),
        SamplerMode::Intermediate | SamplerMode::Difficulty => {
            let w: Vec<f64> = candidates.iter().map(|g| cfg.goal_weight(book.competence(g.text()))).collect();
            WeightedIndex::new(&w).expect("weights are positive").sample(rng)
        }
    };
    candidates.get_index(i).cloned()
}

/// One line of the competence snapshot written to the metrics log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetenceSnapshot {
    pub goal: String,
    pub attempts: u64,
    pub competence: f64,
    pub weight: f64,
}

pub fn snapshot(book: &CompetenceBook, cfg: &SamplerConfig) -> Vec<CompetenceSnapshot> {
    book.iter()
        .map(|(g, r)| CompetenceSnapshot {
            goal: g.to_string(),
            attempts: r.attempts(),
            competence: r.competence(),
            weight: cfg.goal_weight(r.competence()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::goals::{gen_nonsense_goals, GoalOrigin, GoalSetRole};

    fn set(texts: &[&str]) -> GoalSet {
        GoalSet::from_goals(GoalSetRole::Agent, texts.iter().map(|t| Goal::new(t, GoalOrigin::Discovered).unwrap()))
    }

    #[test]
    fn ring_keeps_the_last_window() {
        let mut book = CompetenceBook::default();
        for i in 0..60 {
            book.record_attempt("g", i < 10);
        }
        let r = book.record("g").unwrap();
        assert_eq!((r.stored(), r.attempts()), (50, 60));
        assert_eq!(r.competence(), 0.0);
        let mut book = CompetenceBook::default();
        for i in 0..50 {
            book.record_attempt("g", i % 2 == 0);
        }
        assert_eq!(book.competence("g"), 0.5);
        assert_eq!(book.competence("never tried"), 0.0);
    }

    #[test]
    fn competence_matches_recount_of_interleaved_history() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut book = CompetenceBook::new(50);
        let mut history: IndexMap<String, Vec<bool>> = IndexMap::new();
        for _ in 0..5000 {
            let g = format!("goal {}", rng.gen_range(0..7));
            let ok = rng.gen_bool(0.3);
            book.record_attempt(&g, ok);
            history.entry(g).or_default().push(ok);
        }
        for (g, h) in &history {
            let last = &h[h.len().saturating_sub(50)..];
            let expect = last.iter().filter(|o| **o).count() as f64 / last.len() as f64;
            assert_eq!(book.competence(g), expect);
        }
    }

    #[test]
    fn bump_weight_law() {
        let cfg = SamplerConfig::default();
        assert!((weight(0.5, &cfg) - 1.2).abs() < 1e-12);
        for i in 0..=100 {
            let c = i as f64 / 100.0;
            assert!((weight(c, &cfg) - weight(1.0 - c, &cfg)).abs() < 1e-12);
            assert!(weight(c, &cfg) >= 0.2);
            assert!(weight(c, &cfg) <= 1.2 + 1e-12);
            if c < 0.5 {
                assert!(weight(c, &cfg) < weight(c + 0.01, &cfg));
            }
        }
        let dip = SamplerConfig { sign: ExponentSign::Dip, ..cfg };
        assert!(weight(0.5, &dip) < weight(0.0, &dip));
    }

    #[test]
    fn intermediate_frequencies_follow_weights() {
        let goals = set(&["half", "done"]);
        let mut book = CompetenceBook::default();
        for i in 0..50 {
            book.record_attempt("half", i % 2 == 0);
            book.record_attempt("done", true);
        }
        let cfg = SamplerConfig::with_mode(SamplerMode::Intermediate);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let draws = 10_000;
        let half = (0..draws).filter(|_| sample_goal(&goals, &book, &cfg, &mut rng).unwrap().text() == "half").count()
            as f64
            / draws as f64;
        let w_done = (-2.0f64).exp() + 0.2;
        let expect = 1.2 / (1.2 + w_done);
        assert!((half - expect).abs() < 0.03, "{half} vs {expect}");
    }

    #[test]
    fn difficulty_and_uniform_modes() {
        let goals = set(&["easy", "hard", "new"]);
        let mut book = CompetenceBook::default();
        for _ in 0..10 {
            book.record_attempt("easy", true);
            book.record_attempt("hard", false);
        }
        let cfg = SamplerConfig::with_mode(SamplerMode::Difficulty);
        assert!((cfg.goal_weight(1.0) - 0.05).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts: IndexMap<String, usize> = IndexMap::new();
        for _ in 0..10_000 {
            *counts.entry(sample_goal(&goals, &book, &cfg, &mut rng).unwrap().text().to_string()).or_default() += 1;
        }
        let easy = counts["easy"] as f64 / 10_000.0;
        assert!((easy - 0.05 / 2.15).abs() < 0.03);
        let uniform = SamplerConfig::default();
        let mut n = 0;
        for _ in 0..9000 {
            n += (sample_goal(&goals, &book, &uniform, &mut rng).unwrap().text() == "new") as usize;
        }
        assert!((n as f64 / 9000.0 - 1.0 / 3.0).abs() < 0.03);
        assert!(sample_goal(&GoalSet::new(GoalSetRole::Agent), &book, &uniform, &mut rng).is_none());
    }

    #[test]
    fn extrinsic_list_is_uniform_and_ignores_discovered() {
        let mut list = crate::goals::canonical_goals().goals;
        list.extend(gen_nonsense_goals(100, 1));
        assert_eq!(list.len(), 114);
        let cfg = SamplerConfig::extrinsic(list.clone());
        cfg.validate().unwrap();
        let book = CompetenceBook::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut counts = vec![0usize; 114];
        let draws = 114 * 500;
        for _ in 0..draws {
            let g = sample_goal(&GoalSet::new(GoalSetRole::Agent), &book, &cfg, &mut rng).unwrap();
            counts[list.index_of(g.text()).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 1.0 / 114.0).abs() < 0.005);
        }
        assert!(SamplerConfig::with_mode(SamplerMode::Extrinsic).validate().is_err());
        assert!(SamplerConfig { sigma: 0.0, ..SamplerConfig::default() }.validate().is_err());
    }
}
