//! Run configuration, the named presets and config-file overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::OrchestratorError;
use crate::curriculum::{ExponentSign, SamplerConfig, SamplerMode, DEFAULT_WINDOW};
use crate::qpolicy::{LearnConfig, Optimizer};
use crate::replay::DEFAULT_CAPACITY;

/// Which goals the labeler returns for a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelabelKind {
    /// Achieved goals from the reference goal set.
    Selective,
    /// Every description element ever shown.
    Exhaustive,
    /// No relabeling: only the targeted goal's own reward.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplayKind {
    /// Trajectories indexed by goal, sampled goal-first.
    GoalModular,
    /// Flat FIFO of transitions labeled with the targeted goal.
    Flat,
}

/// Goal weights for replay sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplayWeighting {
    Uniform,
    TransitionProportional,
    /// Competence-based, intermediate-competence weights.
    Intermediate,
    /// Competence-based, `1 − c + ε`.
    Difficulty,
}

/// Parameters of the competence-based samplers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurriculumParams {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub sign: ExponentSign,
    pub difficulty_eps: f64,
    pub window: usize,
}

impl Default for CurriculumParams {
    fn default() -> Self {
        let s = SamplerConfig::default();
        Self {
            alpha: s.alpha,
            beta: s.beta,
            sigma: s.sigma,
            sign: s.sign,
            difficulty_eps: s.difficulty_eps,
            window: DEFAULT_WINDOW,
        }
    }
}

impl CurriculumParams {
    pub fn sampler(&self, mode: SamplerMode) -> SamplerConfig {
        SamplerConfig {
            mode,
            alpha: self.alpha,
            beta: self.beta,
            sigma: self.sigma,
            sign: self.sign,
            difficulty_eps: self.difficulty_eps,
            extrinsic: None,
        }
    }
}

/// Everything that determines a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Preset name (or a free name for config files).
    pub name: String,
    pub seed: u64,
    /// Environment-step budget before `budget_fraction` is applied.
    pub total_steps: u64,
    pub budget_fraction: f64,
    /// Policy steps per goal segment (T).
    pub episode_cap: usize,
    pub go_explore: bool,
    pub go_explore_steps: usize,
    pub goal_chain: bool,
    pub chain_probability: f64,
    /// Continuations allowed after the first goal of an episode.
    pub max_chains: usize,
    pub eval_period: u64,
    /// Evaluations averaged for the running score.
    pub eval_window: usize,
    /// Goal file (canonical goals when absent).
    pub goal_file: Option<PathBuf>,
    pub relabel: RelabelKind,
    pub replay: ReplayKind,
    pub replay_weighting: ReplayWeighting,
    pub episode_sampler: SamplerMode,
    /// Nonsense goals appended to the extrinsic list.
    pub nonsense_goals: usize,
    pub nonsense_seed: u64,
    /// Trajectories (goal-modular) or transitions (flat) kept.
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Environment steps between gradient updates.
    pub update_every: u64,
    pub hidden: usize,
    pub encoder_bits: u32,
    pub learn: LearnConfig,
    pub curriculum: CurriculumParams,
}

/// Desk-scale default step budget.
pub const DEFAULT_TOTAL_STEPS: u64 = 150_000;

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            name: "base".into(),
            seed: 0,
            total_steps: DEFAULT_TOTAL_STEPS,
            budget_fraction: 1.0,
            episode_cap: 30,
            go_explore: false,
            go_explore_steps: 5,
            goal_chain: false,
            chain_probability: 0.5,
            max_chains: 4,
            eval_period: 5_000,
            eval_window: 10,
            goal_file: None,
            relabel: RelabelKind::Selective,
            replay: ReplayKind::GoalModular,
            replay_weighting: ReplayWeighting::Uniform,
            episode_sampler: SamplerMode::Uniform,
            nonsense_goals: 0,
            nonsense_seed: 0,
            replay_capacity: DEFAULT_CAPACITY,
            batch_size: 64,
            update_every: 4,
            hidden: 64,
            encoder_bits: 16,
            learn: LearnConfig {
                temperature: 0.05,
                learning_rate: 0.003,
                optimizer: Optimizer::Adam,
                ..LearnConfig::default()
            },
            curriculum: CurriculumParams::default(),
        }
    }
}

pub const PRESET_NAMES: [&str; 9] = [
    "base",
    "go-explore",
    "chain",
    "go-explore-chain",
    "no-feedback",
    "unconstrained",
    "uniform-transition",
    "metacognitive",
    "extrinsic-impossible",
];

/// The nine named configurations, in canonical order.
pub fn config_presets() -> Vec<RunConfig> {
    PRESET_NAMES.iter().map(|n| preset(n).expect("listed preset exists")).collect()
}

/// One named configuration.
pub fn preset(name: &str) -> Result<RunConfig, OrchestratorError> {
    let base = RunConfig { name: name.to_string(), ..RunConfig::default() };
    let cfg = match name {
        "base" => base,
        "go-explore" => RunConfig { go_explore: true, ..base },
        "chain" => RunConfig { goal_chain: true, ..base },
        "go-explore-chain" => RunConfig { go_explore: true, goal_chain: true, ..base },
        "no-feedback" => RunConfig {
            relabel: RelabelKind::None,
            replay: ReplayKind::Flat,
            episode_sampler: SamplerMode::Extrinsic,
            ..base
        },
        "unconstrained" => RunConfig { relabel: RelabelKind::Exhaustive, budget_fraction: 0.5, ..base },
        "uniform-transition" => RunConfig { replay_weighting: ReplayWeighting::TransitionProportional, ..base },
        "metacognitive" => {
            RunConfig { go_explore: true, goal_chain: true, episode_sampler: SamplerMode::Intermediate, ..base }
        }
        "extrinsic-impossible" => RunConfig { episode_sampler: SamplerMode::Extrinsic, nonsense_goals: 100, ..base },
        _ => return Err(OrchestratorError::UnknownPreset { name: name.to_string(), valid: PRESET_NAMES.join(", ") }),
    };
    Ok(cfg)
}

impl RunConfig {
    /// Steps actually run: `total_steps × budget_fraction`, rounded.
    pub fn step_budget(&self) -> u64 {
        (self.total_steps as f64 * self.budget_fraction).round() as u64
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        let bad = |m: &str| Err(OrchestratorError::InvalidConfig(m.to_string()));
        if self.episode_cap == 0 {
            return bad("episode_cap must be positive");
        }
        if !(0.0..=1.0).contains(&self.chain_probability) {
            return bad("chain_probability must be in [0, 1]");
        }
        if !(self.budget_fraction > 0.0 && self.budget_fraction <= 1.0) {
            return bad("budget_fraction must be in (0, 1]");
        }
        if self.eval_period == 0 || self.eval_window == 0 {
            return bad("eval_period and eval_window must be positive");
        }
        if self.batch_size == 0 || self.update_every == 0 {
            return bad("batch_size and update_every must be positive");
        }
        if self.replay_capacity == 0 || self.hidden == 0 {
            return bad("replay_capacity and hidden must be positive");
        }
        if !(1..=24).contains(&self.encoder_bits) {
            return bad("encoder_bits must be in 1..=24");
        }
        let l = &self.learn;
        if !(0.0..1.0).contains(&l.gamma) {
            return bad("gamma must be in [0, 1)");
        }
        if !(l.temperature > 0.0) || !(l.learning_rate >= 0.0) || !(l.clip_norm > 0.0) {
            return bad("temperature and clip_norm must be positive, learning_rate non-negative");
        }
        if self.curriculum.window == 0 {
            return bad("competence window must be positive");
        }
        if self.relabel == RelabelKind::None && self.episode_sampler != SamplerMode::Extrinsic {
            return bad("without relabeling the agent discovers no goals; use the extrinsic sampler");
        }
        if self.nonsense_goals > 0 && self.episode_sampler != SamplerMode::Extrinsic {
            return bad("nonsense goals are only used by the extrinsic sampler");
        }
        let probe = SamplerConfig { extrinsic: None, ..self.curriculum.sampler(SamplerMode::Uniform) };
        probe.validate().map_err(|e| OrchestratorError::InvalidConfig(e.to_string()))
    }

    /// Resolves `--config`: a preset name, or a TOML file whose optional
    /// `preset` key selects the starting preset (default "base") and whose
    /// other keys override it. Returns the config and the overridden keys,
    /// sorted.
    pub fn resolve(name_or_file: &str) -> Result<(Self, Vec<String>), OrchestratorError> {
        if PRESET_NAMES.contains(&name_or_file) {
            return Ok((preset(name_or_file)?, Vec::new()));
        }
        let path = Path::new(name_or_file);
        if !path.exists() {
            return Err(OrchestratorError::UnknownPreset {
                name: name_or_file.to_string(),
                valid: PRESET_NAMES.join(", "),
            });
        }
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<(Self, Vec<String>), OrchestratorError> {
        let parse = |e: toml::de::Error| OrchestratorError::InvalidConfig(e.to_string());
        let mut user: toml::Table = text.parse().map_err(parse)?;
        let start = match user.remove("preset") {
            Some(toml::Value::String(s)) => s,
            Some(other) => {
                return Err(OrchestratorError::InvalidConfig(format!("preset must be a string, got {other}")))
            }
            None => "base".to_string(),
        };
        let base = preset(&start)?;
        let mut table = toml::Table::try_from(&base).map_err(|e| OrchestratorError::InvalidConfig(e.to_string()))?;
        let mut overrides = Vec::new();
        merge(&mut table, user, "", &mut overrides);
        overrides.sort();
        let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(parse)?;
        cfg.validate()?;
        Ok((cfg, overrides))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }
}

fn merge(dst: &mut toml::Table, src: toml::Table, prefix: &str, keys: &mut Vec<String>) {
    for (k, v) in src {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match (dst.get_mut(&k), v) {
            (Some(toml::Value::Table(d)), toml::Value::Table(s)) => merge(d, s, &path, keys),
            (_, v) => {
                dst.insert(k, v);
                keys.push(path);
            }
        }
    }
}
