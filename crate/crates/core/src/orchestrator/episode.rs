//! Goal-conditioned rollouts with go-explore tails and goal chains.

use std::sync::Arc;

use rand::Rng;

use super::env::{Env, Interner};
use super::OrchestratorError;
use crate::goals::{relabel, reward_text, Goal, GoalSet, RelabelPolicy};
use crate::replay::{EpisodeMeta, StepView, TrajectoryRecord};

/// The mechanism switches of one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeParams {
    /// Policy steps per goal segment (T).
    pub cap: usize,
    pub go_explore: bool,
    pub go_explore_steps: usize,
    pub goal_chain: bool,
    pub chain_probability: f64,
    pub max_chains: usize,
}

/// What the rollout needs from the learning agent.
pub trait EpisodeAgent<R: Rng> {
    /// Index of the action to take in `view` while pursuing `goal`.
    fn act(&mut self, view: &StepView, goal: &Goal, rng: &mut R) -> usize;
    /// Called after every environment step (updates, evaluations).
    fn on_step(&mut self) -> Result<(), OrchestratorError>;
    /// Next goal of a chain; `None` ends the episode.
    fn next_goal(&mut self, rng: &mut R) -> Option<Goal>;
    /// Outcome of one finished goal segment.
    fn record_attempt(&mut self, goal: &Goal, achieved: bool);
}

/// One goal (or goal-less) segment of an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub goal: Option<Goal>,
    /// Index of the first transition of the segment.
    pub start: usize,
    /// Policy steps taken.
    pub policy_steps: usize,
    pub achieved: bool,
    /// Uniform-random go-explore steps after the policy steps.
    pub tail_steps: usize,
}

#[derive(Debug, Clone)]
pub struct Episode {
    pub steps: Vec<StepView>,
    pub actions: Vec<Arc<str>>,
    pub segments: Vec<Segment>,
    /// Goal being pursued at each transition (the segment's goal, also
    /// during its tail).
    pub goal_per_step: Vec<Option<Arc<str>>>,
    /// The episode ran out of step budget.
    pub truncated: bool,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Post-action looks, the canvas for relabeling.
    pub fn looks(&self) -> Vec<&str> {
        self.steps[1..].iter().map(|s| &*s.look).collect()
    }

    pub fn targeted(&self) -> Vec<Goal> {
        self.segments.iter().filter_map(|s| s.goal.clone()).collect()
    }

    /// Relabels the episode and packs it into a replay record (`None` for an
    /// empty episode).
    pub fn into_record(
        self,
        policy: &RelabelPolicy,
        meta: EpisodeMeta,
    ) -> Result<Option<(TrajectoryRecord, GoalSet, Vec<Option<Arc<str>>>)>, OrchestratorError> {
        if self.is_empty() {
            return Ok(None);
        }
        let relabeled = relabel(&self.looks(), policy);
        let targeted = self.targeted();
        let record = TrajectoryRecord::new(self.steps, self.actions, &targeted, &relabeled, meta)?;
        Ok(Some((record, relabeled, self.goal_per_step)))
    }
}

/// Runs one episode from the environment's current state: a segment
/// conditioned on `goal` (uniform-random actions when `None`) that ends on
/// reward or after `cap` steps; then, per `params`, a go-explore tail and,
/// with probability `chain_probability`, another segment on a fresh goal
/// without reset (re-flipped after every segment, at most `max_chains`
/// times). Stops early once `steps_left` environment steps are used.
pub fn run_episode<R: Rng, A: EpisodeAgent<R>>(
    env: &mut Env,
    interner: &mut Interner,
    agent: &mut A,
    goal: Option<Goal>,
    params: &EpisodeParams,
    steps_left: u64,
    rng: &mut R,
) -> Result<Episode, OrchestratorError> {
    let mut ep = Episode {
        steps: vec![env.view().clone()],
        actions: Vec::new(),
        segments: Vec::new(),
        goal_per_step: Vec::new(),
        truncated: false,
    };
    let mut left = steps_left;
    let mut goal = goal;
    let mut chains = 0;
    loop {
        let mut seg = Segment { goal: goal.clone(), start: ep.len(), policy_steps: 0, achieved: false, tail_steps: 0 };
        let label = goal.as_ref().map(|g| g.text_arc().clone());
        while seg.policy_steps < params.cap {
            if left == 0 {
                ep.truncated = true;
                break;
            }
            let view = env.view();
            let i = match &goal {
                Some(g) => agent.act(view, g, rng),
                None => rng.gen_range(0..view.valid_actions.len()),
            };
            take_step(env, interner, &mut ep, i, label.clone());
            left -= 1;
            seg.policy_steps += 1;
            agent.on_step()?;
            if let Some(g) = &goal {
                if reward_text(&env.view().look, g.text()) == 1 {
                    seg.achieved = true;
                    break;
                }
            }
        }
        if let (Some(g), false) = (&goal, ep.truncated) {
            agent.record_attempt(g, seg.achieved);
        }
        if params.go_explore && !ep.truncated {
            while seg.tail_steps < params.go_explore_steps {
                if left == 0 {
                    ep.truncated = true;
                    break;
                }
                let i = rng.gen_range(0..env.view().valid_actions.len());
                take_step(env, interner, &mut ep, i, label.clone());
                left -= 1;
                seg.tail_steps += 1;
                agent.on_step()?;
            }
        }
        ep.segments.push(seg);
        if ep.truncated || !params.goal_chain || chains >= params.max_chains {
            break;
        }
        if !rng.gen_bool(params.chain_probability) {
            break;
        }
        match agent.next_goal(rng) {
            Some(g) => goal = Some(g),
            None => break,
        }
        chains += 1;
    }
    Ok(ep)
}

fn take_step(env: &mut Env, interner: &mut Interner, ep: &mut Episode, i: usize, goal: Option<Arc<str>>) {
    let action = env.step(i, interner);
    ep.actions.push(action);
    ep.steps.push(env.view().clone());
    ep.goal_per_step.push(goal);
}
