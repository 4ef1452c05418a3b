//! Training runs: configuration, rollouts, the learning loop, evaluation
//! and the random-agent baseline.

pub mod baseline;
pub mod config;
pub mod env;
pub mod episode;
pub mod eval;
pub mod train;

use thiserror::Error;

use crate::goals::GoalError;
use crate::qpolicy::QPolicyError;
use crate::replay::ReplayError;
use crate::worldsim::WorldError;

pub use baseline::{baseline_table, run_random_baseline, BaselineRow, BaselineTable, BASELINE_RESET_PERIOD};
pub use config::{
    config_presets, preset, CurriculumParams, RelabelKind, ReplayKind, ReplayWeighting, RunConfig, PRESET_NAMES,
};
pub use env::{Env, Interner};
pub use episode::{run_episode, Episode, EpisodeAgent, EpisodeParams, Segment};
pub use eval::{evaluate, EvalHistory, EvalReport, GoalResult, GreedyPolicy, ModelPolicy};
pub use train::{is_finished_run, train, BufferStats, LossStats, MetricsLine, RunOutcome, RunPaths};

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("unknown configuration `{name}` (not a preset or an existing file); presets: {valid}")]
    UnknownPreset { name: String, valid: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Goal(#[from] GoalError),
    #[error(transparent)]
    QPolicy(#[from] QPolicyError),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
