//! Episodes, evaluation, presets, the random baseline and short training
//! runs through the public orchestrator API.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use autotelic_core::curriculum::SamplerMode;
use autotelic_core::goals::{canonical_goals, relabel, Goal, GoalFile, GoalOrigin, RelabelPolicy};
use autotelic_core::orchestrator::{
    baseline_table, evaluate, preset, run_episode, run_random_baseline, train, Env, EpisodeAgent, EpisodeParams,
    GreedyPolicy, Interner, OrchestratorError, RelabelKind, ReplayKind, ReplayWeighting, RunPaths, PRESET_NAMES,
};
use autotelic_core::replay::{EpisodeMeta, StepView};
use autotelic_core::worldsim::ScenarioConfig;

const WATER: &str = "a substance called water";

/// Plays a fixed action script (then "wait"), and chains to fixed goals.
struct Scripted {
    script: Vec<&'static str>,
    next: usize,
    chain_goals: Vec<Goal>,
    attempts: Vec<(String, bool)>,
    steps: u64,
}

impl Scripted {
    fn new(script: &[&'static str]) -> Self {
        Self { script: script.to_vec(), next: 0, chain_goals: Vec::new(), attempts: Vec::new(), steps: 0 }
    }
}

fn index_of(view: &StepView, text: &str) -> usize {
    view.valid_actions.iter().position(|a| &**a == text).unwrap_or_else(|| panic!("`{text}` not valid"))
}

impl EpisodeAgent<ChaCha8Rng> for Scripted {
    fn act(&mut self, view: &StepView, _goal: &Goal, _rng: &mut ChaCha8Rng) -> usize {
        let text = self.script.get(self.next).copied().unwrap_or("wait");
        self.next += 1;
        index_of(view, text)
    }

    fn on_step(&mut self) -> Result<(), OrchestratorError> {
        self.steps += 1;
        Ok(())
    }

    fn next_goal(&mut self, _rng: &mut ChaCha8Rng) -> Option<Goal> {
        (!self.chain_goals.is_empty()).then(|| self.chain_goals.remove(0))
    }

    fn record_attempt(&mut self, goal: &Goal, achieved: bool) {
        self.attempts.push((goal.text().to_string(), achieved));
    }
}

fn params() -> EpisodeParams {
    EpisodeParams {
        cap: 30,
        go_explore: false,
        go_explore_steps: 5,
        goal_chain: false,
        chain_probability: 0.5,
        max_chains: 4,
    }
}

fn goal(text: &str) -> Goal {
    Goal::new(text, GoalOrigin::SpRelevant).unwrap()
}

fn kitchen() -> (Env, Interner) {
    let mut interner = Interner::default();
    let env = Env::new(ScenarioConfig::kitchen(), &mut interner).unwrap();
    (env, interner)
}

#[test]
fn episode_ends_when_the_goal_is_reached() {
    let (mut env, mut interner) = kitchen();
    let mut agent = Scripted::new(&["look around", "pick up glass cup", "move glass cup to sink", "activate sink"]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let ep = run_episode(&mut env, &mut interner, &mut agent, Some(goal(WATER)), &params(), 1000, &mut rng).unwrap();
    assert_eq!(ep.len(), 4);
    assert_eq!(ep.segments.len(), 1);
    assert_eq!(ep.segments[0].policy_steps, 4);
    assert!(ep.segments[0].achieved);
    assert_eq!(agent.attempts, [(WATER.to_string(), true)]);
    let policy = RelabelPolicy::selective(canonical_goals().goals).unwrap();
    let (record, relabeled, _) = ep.into_record(&policy, EpisodeMeta::default()).unwrap().unwrap();
    assert_eq!(record.rewards(WATER).unwrap(), [0, 0, 0, 1]);
    assert!(relabeled.contains(WATER));
}

#[test]
fn unreached_goal_runs_to_the_cap() {
    let (mut env, mut interner) = kitchen();
    let mut agent = Scripted::new(&[]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let ep = run_episode(&mut env, &mut interner, &mut agent, Some(goal(WATER)), &params(), 1000, &mut rng).unwrap();
    assert_eq!(ep.len(), 30);
    assert!(!ep.segments[0].achieved);
    assert_eq!(agent.attempts, [(WATER.to_string(), false)]);
}

#[test]
fn go_explore_appends_exactly_five_random_steps() {
    let (mut env, mut interner) = kitchen();
    let mut agent = Scripted::new(&["pick up glass cup", "move glass cup to sink", "activate sink"]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = EpisodeParams { go_explore: true, ..params() };
    let ep = run_episode(&mut env, &mut interner, &mut agent, Some(goal(WATER)), &p, 1000, &mut rng).unwrap();
    assert_eq!(ep.segments[0].policy_steps, 3);
    assert_eq!(ep.segments[0].tail_steps, 5);
    assert_eq!(ep.len(), 3 + 5);
    assert_eq!(agent.steps, 8);
    assert!(ep.goal_per_step.iter().all(|g| g.as_deref() == Some(WATER)));
}

#[test]
fn forced_chains_relabel_the_union_of_segments() {
    let (mut env, mut interner) = kitchen();
    let mut agent = Scripted::new(&[
        "open freezer",
        "pick up glass cup",
        "move glass cup to sink",
        "activate sink",
        "close freezer",
        "open fridge",
    ]);
    agent.chain_goals = vec![goal(WATER), goal("a fridge. The fridge door is open.")];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = EpisodeParams { goal_chain: true, chain_probability: 1.0, max_chains: 2, ..params() };
    let first = goal("a freezer. The freezer door is open. In the freezer is: nothing.");
    let ep = run_episode(&mut env, &mut interner, &mut agent, Some(first), &p, 1000, &mut rng).unwrap();
    assert_eq!(ep.segments.len(), 3);
    assert!(ep.segments.iter().all(|s| s.achieved));
    assert_eq!(ep.segments.iter().map(|s| s.policy_steps).collect::<Vec<_>>(), [1, 3, 2]);

    let policy = RelabelPolicy::exhaustive();
    let looks = ep.looks();
    let mut union = BTreeSet::new();
    for s in &ep.segments {
        let end = ep.segments.iter().find(|n| n.start > s.start).map_or(looks.len(), |n| n.start);
        union.extend(relabel(&looks[s.start..end], &policy).texts());
    }
    let whole: BTreeSet<String> = relabel(&looks, &policy).texts().into_iter().collect();
    assert_eq!(whole, union);
}

#[test]
fn episode_stops_at_the_step_budget() {
    let (mut env, mut interner) = kitchen();
    let mut agent = Scripted::new(&[]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let p = EpisodeParams { go_explore: true, ..params() };
    let ep = run_episode(&mut env, &mut interner, &mut agent, Some(goal(WATER)), &p, 7, &mut rng).unwrap();
    assert_eq!(ep.len(), 7);
    assert!(ep.truncated);
    assert!(agent.attempts.is_empty(), "a truncated segment is not an attempt");
}

struct Wait;

impl GreedyPolicy for Wait {
    fn choose(&mut self, view: &StepView, _goal: &str) -> usize {
        index_of(view, "wait")
    }
}

/// Replays the water script for the water goal, waits otherwise.
struct WaterOracle {
    t: usize,
    goal: String,
}

impl GreedyPolicy for WaterOracle {
    fn choose(&mut self, view: &StepView, goal: &str) -> usize {
        if goal != self.goal {
            self.goal = goal.to_string();
            self.t = 0;
        }
        let script = ["pick up glass cup", "move glass cup to sink", "activate sink"];
        let text = if goal == WATER { script.get(self.t).copied().unwrap_or("wait") } else { "wait" };
        self.t += 1;
        index_of(view, text)
    }
}

#[test]
fn evaluation_of_scripted_policies() {
    let goals = canonical_goals();
    let kitchen = ScenarioConfig::kitchen();
    let waiting = evaluate(&mut Wait, &goals, &kitchen, 30).unwrap();
    assert_eq!(waiting.score_all, 0.0);
    assert_eq!(waiting.score_hard, 0.0);
    assert_eq!(waiting.results.len(), goals.goals.len());

    let oracle = evaluate(&mut WaterOracle { t: 0, goal: String::new() }, &goals, &kitchen, 30).unwrap();
    let water = oracle.results.iter().find(|r| r.goal == WATER).unwrap();
    assert!(water.success);
    assert_eq!(water.steps, 3);
    // Waiting after the water script also yields water in the sink.
    let successes = oracle.results.iter().filter(|r| r.success).count();
    assert_eq!(oracle.score_all, 100.0 * successes as f64 / goals.goals.len() as f64);
    assert_eq!(oracle.score_hard, 0.0);
}

#[test]
fn hard_score_uses_only_the_hard_subset() {
    let goals = GoalFile::parse("a substance called water\n[hard]\na substance called ice\n").unwrap();
    let report =
        evaluate(&mut WaterOracle { t: 0, goal: String::new() }, &goals, &ScenarioConfig::kitchen(), 30).unwrap();
    assert_eq!(report.score_all, 50.0);
    assert_eq!(report.score_hard, 0.0);
    let only_water = GoalFile::parse("a substance called water\n").unwrap();
    let report =
        evaluate(&mut WaterOracle { t: 0, goal: String::new() }, &only_water, &ScenarioConfig::kitchen(), 30).unwrap();
    assert_eq!((report.score_all, report.score_hard), (100.0, 0.0));
}

#[test]
fn presets_match_their_switches() {
    assert_eq!(PRESET_NAMES.len(), 9);
    let both = preset("go-explore-chain").unwrap();
    assert!(both.go_explore && both.goal_chain);
    let base = preset("base").unwrap();
    assert!(!base.go_explore && !base.goal_chain);
    assert_eq!(base.episode_sampler, SamplerMode::Uniform);
    assert_eq!(base.replay_weighting, ReplayWeighting::Uniform);
    assert_eq!((base.episode_cap, base.go_explore_steps, base.chain_probability), (30, 5, 0.5));
    let ext = preset("extrinsic-impossible").unwrap();
    assert_eq!(
        (ext.episode_sampler, ext.nonsense_goals, ext.relabel),
        (SamplerMode::Extrinsic, 100, RelabelKind::Selective)
    );
    let nf = preset("no-feedback").unwrap();
    assert_eq!((nf.relabel, nf.replay), (RelabelKind::None, ReplayKind::Flat));
    let un = preset("unconstrained").unwrap();
    assert_eq!(un.relabel, RelabelKind::Exhaustive);
    assert_eq!(un.step_budget() * 2, base.step_budget());
    let mc = preset("metacognitive").unwrap();
    assert!(mc.go_explore && mc.goal_chain);
    assert_eq!(mc.episode_sampler, SamplerMode::Intermediate);
    let err = preset("nope").unwrap_err().to_string();
    assert!(PRESET_NAMES.iter().all(|n| err.contains(n)), "{err}");
}

#[test]
fn random_baseline_edge_cases() {
    let goals = canonical_goals();
    let kitchen = ScenarioConfig::kitchen();
    assert!(run_random_baseline(0, 30, &goals, &kitchen, 0).unwrap().iter().all(|c| *c == 0));
    let a = baseline_table(3000, 30, &goals, &kitchen, &[4]).unwrap();
    let b = baseline_table(3000, 30, &goals, &kitchen, &[4]).unwrap();
    assert_eq!(a, b);
    let mut csv = Vec::new();
    a.write_csv(&mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    assert!(csv.starts_with("goal,hard,seed-4,mean\n"));
    assert_eq!(csv.lines().count(), goals.goals.len() + 1);
    assert!(run_random_baseline(10, 0, &goals, &kitchen, 0).is_err());
}

fn short(name: &str, steps: u64) -> autotelic_core::orchestrator::RunConfig {
    let mut cfg = preset(name).unwrap();
    cfg.total_steps = steps;
    cfg.eval_period = 1000;
    cfg
}

#[test]
fn training_respects_the_budget_and_writes_its_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = short("metacognitive", 2500);
    let paths = RunPaths::under(tmp.path(), &cfg.name, cfg.seed);
    let out = train(&cfg, &["total_steps".into()], Some(&paths)).unwrap();
    assert_eq!(out.steps, 2500);
    assert_eq!(out.metrics.iter().map(|m| m.step).collect::<Vec<_>>(), [1000, 2000, 2500]);
    for p in [paths.manifest(), paths.metrics(), paths.checkpoint(), paths.timing()] {
        assert!(p.is_file(), "{}", p.display());
    }
    assert!(!paths.abort().exists());
    let manifest = std::fs::read_to_string(paths.manifest()).unwrap();
    assert!(manifest.contains("overrides = [\"total_steps\"]"), "{manifest}");
    let lines = std::fs::read_to_string(paths.metrics()).unwrap();
    assert_eq!(lines.lines().count(), 3);
    // Discovered goals only grow.
    let counts: Vec<usize> = out.metrics.iter().map(|m| m.discovered).collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    for m in &out.metrics {
        assert!((0.0..=100.0).contains(&m.eval_all) && (0.0..=100.0).contains(&m.eval_hard));
    }
}

#[test]
fn no_feedback_discovers_nothing_and_exhaustive_discovers_most() {
    let nf = train(&short("no-feedback", 1500), &[], None).unwrap();
    assert!(nf.discovered.is_empty());
    let base = train(&short("base", 1500), &[], None).unwrap();
    let un = train(&short("unconstrained", 3000), &[], None).unwrap();
    assert_eq!(un.steps, 1500);
    assert!(
        un.discovered.len() > 10 * base.discovered.len().max(1),
        "{} vs {}",
        un.discovered.len(),
        base.discovered.len()
    );
    let reference: BTreeSet<String> = canonical_goals().goals.iter().map(|g| g.text().to_string()).collect();
    assert!(base.discovered.iter().all(|g| reference.contains(g)));
}
