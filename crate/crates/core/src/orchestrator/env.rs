//! Kitchen environment wrapper producing shared, interned step views.
//!
//! Trajectories repeat the same descriptions and action lists many times;
//! interning keeps one copy of each text in memory.

use std::sync::Arc;

use rustc_hash::FxHashSet;

use crate::replay::StepView;
use crate::worldsim::{reset, valid_actions, Action, Observation, ScenarioConfig, WorldError, WorldState};

#[derive(Debug, Default)]
pub struct Interner {
    texts: FxHashSet<Arc<str>>,
    lists: FxHashSet<Arc<[Arc<str>]>>,
}

impl Interner {
    pub fn text(&mut self, s: &str) -> Arc<str> {
        if let Some(t) = self.texts.get(s) {
            return t.clone();
        }
        let t: Arc<str> = Arc::from(s);
        self.texts.insert(t.clone());
        t
    }

    pub fn list(&mut self, items: Vec<Arc<str>>) -> Arc<[Arc<str>]> {
        if let Some(l) = self.lists.get(items.as_slice()) {
            return l.clone();
        }
        let l: Arc<[Arc<str>]> = Arc::from(items);
        self.lists.insert(l.clone());
        l
    }

    pub fn len(&self) -> usize {
        self.texts.len() + self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A running kitchen with its current view and valid actions.
pub struct Env {
    scenario: ScenarioConfig,
    state: WorldState,
    actions: Vec<Action>,
    view: StepView,
}

impl Env {
    pub fn new(scenario: ScenarioConfig, interner: &mut Interner) -> Result<Self, WorldError> {
        let (state, obs) = reset(&scenario, 0)?;
        let (actions, view) = Self::snapshot(&state, &obs, interner);
        Ok(Self { scenario, state, actions, view })
    }

    fn snapshot(state: &WorldState, obs: &Observation, interner: &mut Interner) -> (Vec<Action>, StepView) {
        let actions = valid_actions(state);
        let texts = actions.iter().map(|a| interner.text(&a.surface_text)).collect();
        let view = StepView {
            obs: interner.text(&obs.obs),
            look: interner.text(&obs.look),
            inv: interner.text(&obs.inv),
            valid_actions: interner.list(texts),
        };
        (actions, view)
    }

    pub fn reset(&mut self, interner: &mut Interner) -> Result<(), WorldError> {
        let (state, obs) = reset(&self.scenario, 0)?;
        let (actions, view) = Self::snapshot(&state, &obs, interner);
        self.state = state;
        self.actions = actions;
        self.view = view;
        Ok(())
    }

    pub fn view(&self) -> &StepView {
        &self.view
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    /// Applies the `i`-th valid action. A rejected action (which cannot
    /// happen for indices into the valid list) becomes a no-op step.
    pub fn step(&mut self, i: usize, interner: &mut Interner) -> Arc<str> {
        let action = self.actions[i].clone();
        let obs = match self.state.apply(&action) {
            Ok(o) => o,
            Err(_) => crate::worldsim::REJECTED_OBS.to_string(),
        };
        let observation = self.state.observe(obs);
        let (actions, view) = Self::snapshot(&self.state, &observation, interner);
        self.actions = actions;
        self.view = view;
        interner.text(&action.surface_text)
    }
}
