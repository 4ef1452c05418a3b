//! The learning loop: rollouts, relabeling, replay, TD updates and periodic
//! greedy evaluation, with the run's files.
//!
//! A run directory holds `manifest.toml` (the resolved configuration, the
//! overridden keys and the step budget), `metrics.jsonl` (one line per
//! evaluation; deterministic for a seed), `checkpoint.json` (final model),
//! `timing.json` (wall-clock, the only non-deterministic file) and, when a
//! run fails, `abort.json`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use indexmap::IndexMap;
use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{RelabelKind, ReplayKind, ReplayWeighting, RunConfig};
use super::env::{Env, Interner};
use super::episode::{run_episode, EpisodeAgent, EpisodeParams};
use super::eval::{evaluate, EvalHistory, ModelPolicy};
use super::OrchestratorError;
use crate::curriculum::{sample_goal, snapshot, CompetenceBook, CompetenceSnapshot, SamplerConfig, SamplerMode};
use crate::goals::{canonical_goals, gen_nonsense_goals, Goal, GoalFile, GoalSet, GoalSetRole, RelabelPolicy};
use crate::qpolicy::{select_action, FeatureCache, HashedEncoder, QModel, QPolicyError, SelectMode};
use crate::replay::{EpisodeMeta, GoalSampler, ReplayBuffer, StepView, TransitionBuffer, WeightMode};
use crate::worldsim::ScenarioConfig;

/// Replay statistics at an evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferStats {
    /// Trajectories (goal-modular) or transitions (flat) stored.
    pub items: usize,
    /// Goals with at least one indexed trajectory (0 for the flat buffer).
    pub goals: usize,
}

/// Losses averaged over the updates since the previous evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossStats {
    pub updates: u64,
    pub skipped: u64,
    pub td: f64,
    pub entropy: f64,
}

/// One evaluation, as written to `metrics.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsLine {
    pub config: String,
    pub seed: u64,
    pub step: u64,
    pub episodes: u64,
    /// Success rate ×100 on all evaluation goals at this evaluation.
    pub eval_all: f64,
    /// Success rate ×100 on the hard goals at this evaluation.
    pub eval_hard: f64,
    /// Means over the most recent evaluations (up to the eval window).
    pub running_all: f64,
    pub running_hard: f64,
    pub per_goal: IndexMap<String, bool>,
    /// Size of the agent's discovered goal set.
    pub discovered: usize,
    pub buffer: BufferStats,
    pub loss: LossStats,
    pub competence: Vec<CompetenceSnapshot>,
}

/// File names inside a run directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPaths {
    pub dir: PathBuf,
}

impl RunPaths {
    /// `<out>/<config>/seed-<seed>`.
    pub fn under(out: &Path, config: &str, seed: u64) -> Self {
        Self { dir: out.join(config).join(format!("seed-{seed}")) }
    }

    pub fn manifest(&self) -> PathBuf {
        self.dir.join("manifest.toml")
    }

    pub fn metrics(&self) -> PathBuf {
        self.dir.join("metrics.jsonl")
    }

    pub fn checkpoint(&self) -> PathBuf {
        self.dir.join("checkpoint.json")
    }

    pub fn timing(&self) -> PathBuf {
        self.dir.join("timing.json")
    }

    pub fn abort(&self) -> PathBuf {
        self.dir.join("abort.json")
    }
}

/// What a finished run leaves in memory.
pub struct RunOutcome {
    pub metrics: Vec<MetricsLine>,
    pub model: QModel,
    /// Discovered goal texts, in discovery order.
    pub discovered: Vec<String>,
    pub steps: u64,
    pub episodes: u64,
    pub wall_clock_secs: f64,
}

#[derive(Serialize)]
struct Timing {
    config: String,
    seed: u64,
    steps: u64,
    wall_clock_secs: f64,
    ms_per_step: f64,
}

#[derive(Serialize)]
struct AbortDump {
    config: String,
    seed: u64,
    step: u64,
    episodes: u64,
    error: String,
    discovered: Vec<String>,
    buffer: BufferStats,
}

enum Replay {
    Modular(ReplayBuffer),
    Flat(TransitionBuffer),
}

struct Learner {
    cfg: RunConfig,
    budget: u64,
    scenario: ScenarioConfig,
    eval_goals: GoalFile,
    model: QModel,
    cache: FeatureCache,
    replay: Replay,
    /// Goal weights for the modular buffer; `None` after any change.
    goal_sampler: Option<Option<GoalSampler>>,
    episode_sampler: SamplerConfig,
    discovered: GoalSet,
    book: CompetenceBook,
    rng: ChaCha8Rng,
    steps: u64,
    episodes: u64,
    loss: LossStats,
    history: EvalHistory,
    metrics: Vec<MetricsLine>,
    writer: Option<BufWriter<File>>,
}

impl Learner {
    fn update(&mut self) -> Result<(), OrchestratorError> {
        let n = self.cfg.batch_size;
        let batch = match &self.replay {
            Replay::Flat(buf) => buf.sample_batch(n, &mut self.rng),
            Replay::Modular(buf) => {
                if self.goal_sampler.is_none() {
                    let weights = match self.cfg.replay_weighting {
                        ReplayWeighting::Uniform => buf.goal_weights(WeightMode::Uniform)?,
                        ReplayWeighting::TransitionProportional => {
                            buf.goal_weights(WeightMode::TransitionProportional)?
                        }
                        ReplayWeighting::Intermediate | ReplayWeighting::Difficulty => {
                            let mode = if self.cfg.replay_weighting == ReplayWeighting::Intermediate {
                                SamplerMode::Intermediate
                            } else {
                                SamplerMode::Difficulty
                            };
                            let s = self.cfg.curriculum.sampler(mode);
                            let ext: IndexMap<Arc<str>, f64> = buf
                                .index()
                                .keys()
                                .map(|g| (g.clone(), s.goal_weight(self.book.competence(g))))
                                .collect();
                            buf.goal_weights(WeightMode::External(&ext))?
                        }
                    };
                    self.goal_sampler = Some(buf.goal_sampler(&weights));
                }
                match self.goal_sampler.as_ref().expect("prepared above") {
                    Some(s) => buf.sample_with(s, n, &mut self.rng),
                    None => Vec::new(),
                }
            }
        };
        if batch.is_empty() {
            return Ok(());
        }
        match self.model.update(&mut self.cache, &batch, &self.cfg.learn) {
            Ok(l) => {
                let k = self.loss.updates as f64;
                self.loss.td = (self.loss.td * k + l.td_term) / (k + 1.0);
                self.loss.entropy = (self.loss.entropy * k + l.entropy_term) / (k + 1.0);
                self.loss.updates += 1;
            }
            Err(QPolicyError::NonFinite(msg)) => {
                warn!("step {}: {msg}", self.steps);
                self.loss.skipped += 1;
            }
            Err(e) => return Err(e.into()),
        }
        Ok(())
    }

    fn buffer_stats(&self) -> BufferStats {
        match &self.replay {
            Replay::Modular(b) => BufferStats { items: b.len(), goals: b.index().len() },
            Replay::Flat(b) => BufferStats { items: b.len(), goals: 0 },
        }
    }

    fn evaluate(&mut self) -> Result<(), OrchestratorError> {
        let mut policy = ModelPolicy { model: &self.model, cache: &mut self.cache };
        let report = evaluate(&mut policy, &self.eval_goals, &self.scenario, self.cfg.episode_cap)?;
        self.history.push(&report);
        let (running_all, running_hard) = self.history.mean();
        let line = MetricsLine {
            config: self.cfg.name.clone(),
            seed: self.cfg.seed,
            step: self.steps,
            episodes: self.episodes,
            eval_all: report.score_all,
            eval_hard: report.score_hard,
            running_all,
            running_hard,
            per_goal: report.results.iter().map(|r| (r.goal.clone(), r.success)).collect(),
            discovered: self.discovered.len(),
            buffer: self.buffer_stats(),
            loss: std::mem::replace(&mut self.loss, LossStats { updates: 0, skipped: 0, td: 0.0, entropy: 0.0 }),
            competence: snapshot(&self.book, &self.episode_sampler),
        };
        info!(
            "{} seed {} step {}: eval {:.1} (hard {:.1}), running {:.1}, discovered {}",
            line.config, line.seed, line.step, line.eval_all, line.eval_hard, line.running_all, line.discovered
        );
        if let Some(w) = &mut self.writer {
            serde_json::to_writer(&mut *w, &line).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        self.metrics.push(line);
        Ok(())
    }

    fn store(&mut self, episode: super::episode::Episode, policy: &RelabelPolicy) -> Result<(), OrchestratorError> {
        let meta = EpisodeMeta { seed: self.cfg.seed, step_index: self.steps - episode.len() as u64 };
        let Some((record, relabeled, goal_per_step)) = episode.into_record(policy, meta)? else {
            return Ok(());
        };
        self.discovered.extend(relabeled.iter().cloned());
        match &mut self.replay {
            Replay::Modular(b) => {
                b.push(record)?;
            }
            Replay::Flat(b) => b.push_trajectory(&record, &goal_per_step),
        }
        self.goal_sampler = None;
        Ok(())
    }
}

impl EpisodeAgent<ChaCha8Rng> for Learner {
    fn act(&mut self, view: &StepView, goal: &Goal, rng: &mut ChaCha8Rng) -> usize {
        let q =
            self.model.q_values(&mut self.cache, &view.obs, &view.look, &view.inv, goal.text(), &view.valid_actions);
        select_action(&q, SelectMode::Train, self.cfg.learn.temperature, rng)
    }

    fn on_step(&mut self) -> Result<(), OrchestratorError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(OrchestratorError::Invariant(format!("step {} beyond budget {}", self.steps, self.budget)));
        }
        if self.steps % self.cfg.update_every == 0 {
            self.update()?;
        }
        if self.steps % self.cfg.eval_period == 0 || self.steps == self.budget {
            self.evaluate()?;
        }
        Ok(())
    }

    fn next_goal(&mut self, rng: &mut ChaCha8Rng) -> Option<Goal> {
        sample_goal(&self.discovered, &self.book, &self.episode_sampler, rng)
    }

    fn record_attempt(&mut self, goal: &Goal, achieved: bool) {
        self.book.record_attempt(goal.text(), achieved);
        if matches!(self.cfg.replay_weighting, ReplayWeighting::Intermediate | ReplayWeighting::Difficulty) {
            self.goal_sampler = None;
        }
    }
}

fn manifest(cfg: &RunConfig, overrides: &[String], goals: &GoalFile) -> Result<String, OrchestratorError> {
    let invalid = |e: toml::ser::Error| OrchestratorError::InvalidConfig(e.to_string());
    let mut run = toml::Table::new();
    run.insert("config".into(), cfg.name.clone().into());
    run.insert("seed".into(), (cfg.seed as i64).into());
    run.insert("step_budget".into(), (cfg.step_budget() as i64).into());
    run.insert("overrides".into(), toml::Value::Array(overrides.iter().map(|k| k.clone().into()).collect()));
    run.insert("eval_goals".into(), (goals.goals.len() as i64).into());
    run.insert("hard_goals".into(), (goals.hard.len() as i64).into());
    let mut doc = toml::Table::new();
    doc.insert("run".into(), run.into());
    doc.insert("config".into(), toml::Table::try_from(cfg).map_err(invalid)?.into());
    toml::to_string(&doc).map_err(invalid)
}

/// Whether `paths` holds a finished run of exactly this configuration: the
/// same manifest, a checkpoint and a timing record. Runs are deterministic,
/// so such a run can be reused instead of repeated.
pub fn is_finished_run(cfg: &RunConfig, overrides: &[String], paths: &RunPaths) -> Result<bool, OrchestratorError> {
    if !paths.checkpoint().is_file() || !paths.timing().is_file() {
        return Ok(false);
    }
    let goals = match &cfg.goal_file {
        Some(p) => GoalFile::load(p)?,
        None => canonical_goals(),
    };
    let expected = manifest(cfg, overrides, &goals)?;
    Ok(std::fs::read_to_string(paths.manifest()).is_ok_and(|m| m == expected))
}

/// Runs one training run. With `dir`, the run's files are written there.
pub fn train(cfg: &RunConfig, overrides: &[String], dir: Option<&RunPaths>) -> Result<RunOutcome, OrchestratorError> {
    cfg.validate()?;
    let started = Instant::now();
    let eval_goals = match &cfg.goal_file {
        Some(p) => GoalFile::load(p)?,
        None => canonical_goals(),
    };
    let scenario = ScenarioConfig::kitchen();
    let mut episode_sampler = cfg.curriculum.sampler(cfg.episode_sampler);
    if cfg.episode_sampler == SamplerMode::Extrinsic {
        let mut list = GoalSet::from_goals(GoalSetRole::Sp, eval_goals.goals.iter().cloned());
        list.extend(gen_nonsense_goals(cfg.nonsense_goals, cfg.nonsense_seed));
        episode_sampler.extrinsic = Some(list);
    }
    episode_sampler.validate().map_err(|e| OrchestratorError::InvalidConfig(e.to_string()))?;
    let relabel_policy = match cfg.relabel {
        RelabelKind::Selective => RelabelPolicy::selective(eval_goals.goals.clone())?,
        RelabelKind::Exhaustive => RelabelPolicy::exhaustive(),
        RelabelKind::None => RelabelPolicy::none(),
    };

    let writer = match dir {
        Some(paths) => {
            std::fs::create_dir_all(&paths.dir)?;
            let _ = std::fs::remove_file(paths.abort());
            std::fs::write(paths.manifest(), manifest(cfg, overrides, &eval_goals)?)?;
            Some(BufWriter::new(File::create(paths.metrics())?))
        }
        None => None,
    };

    let encoder = HashedEncoder::new(cfg.encoder_bits);
    let mut episode_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut learner_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    learner_rng.set_stream(1);
    let budget = cfg.step_budget();
    let mut learner = Learner {
        cfg: cfg.clone(),
        budget,
        scenario: scenario.clone(),
        model: QModel::new(encoder.clone(), cfg.hidden, cfg.seed),
        cache: FeatureCache::new(encoder),
        replay: match cfg.replay {
            ReplayKind::GoalModular => Replay::Modular(ReplayBuffer::new(cfg.replay_capacity)),
            ReplayKind::Flat => Replay::Flat(TransitionBuffer::new(cfg.replay_capacity)),
        },
        goal_sampler: None,
        episode_sampler,
        discovered: GoalSet::new(GoalSetRole::Agent),
        book: CompetenceBook::new(cfg.curriculum.window),
        rng: learner_rng,
        steps: 0,
        episodes: 0,
        loss: LossStats { updates: 0, skipped: 0, td: 0.0, entropy: 0.0 },
        history: EvalHistory::new(cfg.eval_window),
        metrics: Vec::new(),
        writer,
        eval_goals,
    };
    let params = EpisodeParams {
        cap: cfg.episode_cap,
        go_explore: cfg.go_explore,
        go_explore_steps: cfg.go_explore_steps,
        goal_chain: cfg.goal_chain,
        chain_probability: cfg.chain_probability,
        max_chains: cfg.max_chains,
    };

    let mut interner = Interner::default();
    let result = (|| -> Result<(), OrchestratorError> {
        let mut env = Env::new(scenario, &mut interner)?;
        while learner.steps < budget {
            env.reset(&mut interner)?;
            let goal = learner.next_goal(&mut episode_rng);
            let left = budget - learner.steps;
            let episode = run_episode(&mut env, &mut interner, &mut learner, goal, &params, left, &mut episode_rng)?;
            learner.episodes += 1;
            learner.store(episode, &relabel_policy)?;
        }
        Ok(())
    })();

    if let Err(e) = result {
        if let Some(paths) = dir {
            let dump = AbortDump {
                config: cfg.name.clone(),
                seed: cfg.seed,
                step: learner.steps,
                episodes: learner.episodes,
                error: e.to_string(),
                discovered: learner.discovered.texts(),
                buffer: learner.buffer_stats(),
            };
            let text = serde_json::to_string_pretty(&dump).map_err(std::io::Error::from)?;
            std::fs::write(paths.abort(), text)?;
        }
        return Err(e);
    }

    let wall_clock_secs = started.elapsed().as_secs_f64();
    if let Some(paths) = dir {
        let mut w = BufWriter::new(File::create(paths.checkpoint())?);
        learner.model.write_checkpoint(&mut w)?;
        w.flush()?;
        let timing = Timing {
            config: cfg.name.clone(),
            seed: cfg.seed,
            steps: learner.steps,
            wall_clock_secs,
            ms_per_step: 1000.0 * wall_clock_secs / learner.steps.max(1) as f64,
        };
        let text = serde_json::to_string_pretty(&timing).map_err(std::io::Error::from)?;
        std::fs::write(paths.timing(), text)?;
    }
    Ok(RunOutcome {
        discovered: learner.discovered.texts(),
        steps: learner.steps,
        episodes: learner.episodes,
        metrics: learner.metrics,
        model: learner.model,
        wall_clock_secs,
    })
}
