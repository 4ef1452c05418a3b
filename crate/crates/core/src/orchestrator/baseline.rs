//! Uniform-random agent: how often each goal shows up in the look.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::env::{Env, Interner};
use super::OrchestratorError;
use crate::goals::{reward_text, GoalFile};
use crate::worldsim::ScenarioConfig;

/// Environment steps between resets of the random agent.
pub const BASELINE_RESET_PERIOD: u64 = 30;

/// For each goal of `goals` (file order), the number of steps after which
/// the goal appeared in the look, over `steps` uniform-random actions with a
/// reset every `reset_period` steps.
pub fn run_random_baseline(
    steps: u64,
    reset_period: u64,
    goals: &GoalFile,
    scenario: &ScenarioConfig,
    seed: u64,
) -> Result<Vec<u64>, OrchestratorError> {
    if reset_period == 0 {
        return Err(OrchestratorError::InvalidConfig("reset period must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut interner = Interner::default();
    let mut env = Env::new(scenario.clone(), &mut interner)?;
    let mut counts = vec![0u64; goals.goals.len()];
    for t in 0..steps {
        if t > 0 && t % reset_period == 0 {
            env.reset(&mut interner)?;
        }
        let i = rng.gen_range(0..env.view().valid_actions.len());
        env.step(i, &mut interner);
        let look = &env.view().look;
        for (c, g) in counts.iter_mut().zip(goals.goals.iter()) {
            *c += reward_text(look, g.text()) as u64;
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineRow {
    pub goal: String,
    pub hard: bool,
    /// One count per seed.
    pub counts: Vec<u64>,
}

/// Random-agent goal counts for several seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineTable {
    pub steps: u64,
    pub reset_period: u64,
    pub seeds: Vec<u64>,
    pub rows: Vec<BaselineRow>,
}

pub fn baseline_table(
    steps: u64,
    reset_period: u64,
    goals: &GoalFile,
    scenario: &ScenarioConfig,
    seeds: &[u64],
) -> Result<BaselineTable, OrchestratorError> {
    let per_seed = seeds
        .iter()
        .map(|s| run_random_baseline(steps, reset_period, goals, scenario, *s))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = goals
        .goals
        .iter()
        .enumerate()
        .map(|(i, g)| BaselineRow {
            goal: g.text().to_string(),
            hard: goals.is_hard(g.text()),
            counts: per_seed.iter().map(|c| c[i]).collect(),
        })
        .collect();
    Ok(BaselineTable { steps, reset_period, seeds: seeds.to_vec(), rows })
}

impl BaselineTable {
    /// Hard goals reached at least once, with their counts.
    pub fn hard_hits(&self) -> Vec<&BaselineRow> {
        self.rows.iter().filter(|r| r.hard && r.counts.iter().any(|c| *c > 0)).collect()
    }

    /// CSV with one row per goal: `goal,hard,seed-<s>...,mean`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), OrchestratorError> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| OrchestratorError::Io(std::io::Error::other(e));
        let mut header = vec!["goal".to_string(), "hard".to_string()];
        header.extend(self.seeds.iter().map(|s| format!("seed-{s}")));
        header.push("mean".into());
        out.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mean = r.counts.iter().sum::<u64>() as f64 / r.counts.len().max(1) as f64;
            let mut rec = vec![r.goal.clone(), r.hard.to_string()];
            rec.extend(r.counts.iter().map(u64::to_string));
            rec.push(format!("{mean:.1}"));
            out.write_record(&rec).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}
