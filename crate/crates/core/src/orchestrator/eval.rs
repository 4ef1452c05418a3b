//! Greedy evaluation on a fixed goal list.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::env::{Env, Interner};
use super::OrchestratorError;
use crate::goals::{reward_text, GoalFile};
use crate::qpolicy::{argmax, FeatureCache, QModel};
use crate::replay::StepView;
use crate::worldsim::ScenarioConfig;

/// Chooses an action index for a view and goal, without randomness.
pub trait GreedyPolicy {
    fn choose(&mut self, view: &StepView, goal: &str) -> usize;
}

/// Argmax over the model's scores.
pub struct ModelPolicy<'a> {
    pub model: &'a QModel,
    pub cache: &'a mut FeatureCache,
}

impl GreedyPolicy for ModelPolicy<'_> {
    fn choose(&mut self, view: &StepView, goal: &str) -> usize {
        let q = self.model.q_values(self.cache, &view.obs, &view.look, &view.inv, goal, &view.valid_actions);
        argmax(&q)
    }
}

/// Result of one greedy rollout per goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalResult {
    pub goal: String,
    pub hard: bool,
    pub success: bool,
    /// Steps taken until success (or the cap).
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub results: Vec<GoalResult>,
    /// Success rate ×100 over all goals.
    pub score_all: f64,
    /// Success rate ×100 over the hard goals (0 when there are none).
    pub score_hard: f64,
}

/// One greedy episode per goal from a fresh reset; success when the goal
/// appears in the look within `cap` steps.
pub fn evaluate<P: GreedyPolicy>(
    policy: &mut P,
    goals: &GoalFile,
    scenario: &ScenarioConfig,
    cap: usize,
) -> Result<EvalReport, OrchestratorError> {
    let mut interner = Interner::default();
    let mut env = Env::new(scenario.clone(), &mut interner)?;
    let mut results = Vec::with_capacity(goals.goals.len());
    for goal in goals.goals.iter() {
        env.reset(&mut interner)?;
        let mut success = false;
        let mut steps = 0;
        while steps < cap {
            let i = policy.choose(env.view(), goal.text());
            env.step(i, &mut interner);
            steps += 1;
            if reward_text(&env.view().look, goal.text()) == 1 {
                success = true;
                break;
            }
        }
        results.push(GoalResult { goal: goal.text().to_string(), hard: goals.is_hard(goal.text()), success, steps });
    }
    let rate = |rs: Vec<&GoalResult>| {
        if rs.is_empty() {
            0.0
        } else {
            100.0 * rs.iter().filter(|r| r.success).count() as f64 / rs.len() as f64
        }
    };
    let score_all = rate(results.iter().collect());
    let score_hard = rate(results.iter().filter(|r| r.hard).collect());
    Ok(EvalReport { results, score_all, score_hard })
}

/// The most recent evaluations, for the running score.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalHistory {
    window: usize,
    recent: VecDeque<(f64, f64)>,
}

impl EvalHistory {
    pub fn new(window: usize) -> Self {
        assert!(window > 0, "eval window must be positive");
        Self { window, recent: VecDeque::new() }
    }

    pub fn push(&mut self, report: &EvalReport) {
        if self.recent.len() == self.window {
            self.recent.pop_front();
        }
        self.recent.push_back((report.score_all, report.score_hard));
    }

    pub fn len(&self) -> usize {
        self.recent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recent.is_empty()
    }

    /// Mean (all, hard) over the stored evaluations; zeros when empty.
    pub fn mean(&self) -> (f64, f64) {
        if self.recent.is_empty() {
            return (0.0, 0.0);
        }
        let n = self.recent.len() as f64;
        let (a, h) = self.recent.iter().fold((0.0, 0.0), |(a, h), (x, y)| (a + x, h + y));
        (a / n, h / n)
    }
}
