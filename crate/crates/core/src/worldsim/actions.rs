use std::fmt;

use serde::{Deserialize, Serialize};

use super::render::{render_inv, render_look};
use super::state::{NodeId, NodeKind, Observation, Placement, Role, WorldState};
use super::thermo::tick_in_place;
use super::WorldError;

/// Obs text returned for an action outside the valid set.
pub const REJECTED_OBS: &str = "You can't do that.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Predicate {
    Look,
    Inventory,
    Wait,
    Open,
    Close,
    Activate,
    Deactivate,
    PickUp,
    MoveTo,
    PourInto,
}

impl Predicate {
    pub const ALL: [Predicate; 10] = [
        Predicate::Look,
        Predicate::Inventory,
        Predicate::Wait,
        Predicate::Open,
        Predicate::Close,
        Predicate::Activate,
        Predicate::Deactivate,
        Predicate::PickUp,
        Predicate::MoveTo,
        Predicate::PourInto,
    ];

    pub fn arity(self) -> usize {
        match self {
            Predicate::Look | Predicate::Inventory | Predicate::Wait => 0,
            Predicate::Open | Predicate::Close | Predicate::Activate | Predicate::Deactivate | Predicate::PickUp => 1,
            Predicate::MoveTo | Predicate::PourInto => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub predicate: Predicate,
    pub arg1: Option<NodeId>,
    pub arg2: Option<NodeId>,
    pub surface_text: String,
}

impl Action {
    /// Builds an action with its canonical surface text. Panics if the
    /// argument count does not match the predicate's arity.
    pub fn new(state: &WorldState, predicate: Predicate, arg1: Option<NodeId>, arg2: Option<NodeId>) -> Self {
        let given = arg1.is_some() as usize + arg2.is_some() as usize;
        assert!(
            given == predicate.arity() && (arg2.is_none() || arg1.is_some()),
            "{predicate:?} takes {} arguments",
            predicate.arity()
        );
        let name = |id: Option<NodeId>| state.node(id.expect("arity checked")).name.clone();
        let surface_text = match predicate {
            Predicate::Look => "look around".to_string(),
            Predicate::Inventory => "inventory".to_string(),
            Predicate::Wait => "wait".to_string(),
            Predicate::Open => format!("open {}", name(arg1)),
            Predicate::Close => format!("close {}", name(arg1)),
            Predicate::Activate => format!("activate {}", name(arg1)),
            Predicate::Deactivate => format!("deactivate {}", name(arg1)),
            Predicate::PickUp => format!("pick up {}", name(arg1)),
            Predicate::MoveTo => format!("move {} to {}", name(arg1), name(arg2)),
            Predicate::PourInto => format!("pour {} into {}", name(arg1), name(arg2)),
        };
        Self { predicate, arg1, arg2, surface_text }
    }

    fn same_call(&self, other: &Action) -> bool {
        self.predicate == other.predicate && self.arg1 == other.arg1 && self.arg2 == other.arg2
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface_text)
    }
}

/// Nodes the agent can see and act on, in id order: everything reachable
/// from the room through nodes that expose their contents, plus inventory.
pub fn visible_nodes(state: &WorldState) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut stack = vec![state.room_root()];
    while let Some(id) = stack.pop() {
        let node = state.node(id);
        if id != state.room_root() {
            out.push(id);
        }
        if node.exposes_contents() {
            stack.extend(node.contents.iter().copied());
        }
    }
    out.sort_unstable();
    out
}

fn has_listed_contents(state: &WorldState, id: NodeId) -> bool {
    state.node(id).contents.iter().any(|c| !state.node(*c).part)
}

/// All well-typed actions over currently visible objects, ordered by
/// predicate and then by argument ids. Always starts with look, inventory, wait.
///
/// Beyond typing, three handling rules apply: heaters only light while the
/// agent holds an igniter, a vessel must be carried to be poured, and liquids
/// are poured only into receptacles that hold things "in" (not onto surfaces).
pub fn valid_actions(state: &WorldState) -> Vec<Action> {
    let visible = visible_nodes(state);
    let agent = state.agent_id();
    let holding_igniter = state.node(agent).contents.iter().any(|c| state.node(*c).role == Role::Igniter);
    let mut out: Vec<Action> = vec![
        Action::new(state, Predicate::Look, None, None),
        Action::new(state, Predicate::Inventory, None, None),
        Action::new(state, Predicate::Wait, None, None),
    ];
    let unary = |out: &mut Vec<Action>, p: Predicate, keep: &dyn Fn(NodeId) -> bool| {
        for &id in &visible {
            if keep(id) {
                out.push(Action::new(state, p, Some(id), None));
            }
        }
    };
    unary(&mut out, Predicate::Open, &|id| state.node(id).openable);
    unary(&mut out, Predicate::Close, &|id| state.node(id).openable);
    unary(&mut out, Predicate::Activate, &|id| {
        let n = state.node(id);
        n.activatable && (n.role != Role::Heater || holding_igniter)
    });
    unary(&mut out, Predicate::Deactivate, &|id| state.node(id).activatable);
    unary(&mut out, Predicate::PickUp, &|id| {
        let n = state.node(id);
        n.portable && n.parent != Some(agent)
    });

    let receptacles: Vec<NodeId> = visible.iter().copied().filter(|id| state.node(*id).accepts_items()).collect();
    let into = |x: NodeId, y: NodeId| y != x && !state.is_descendant(y, x);
    for &x in &visible {
        if !state.node(x).portable {
            continue;
        }
        for &y in &receptacles {
            if into(x, y) {
                out.push(Action::new(state, Predicate::MoveTo, Some(x), Some(y)));
            }
        }
    }
    for &x in &visible {
        let n = state.node(x);
        let pourable = n.portable && n.kind == NodeKind::Container && n.exposes_contents();
        if !pourable || n.parent != Some(agent) || !has_listed_contents(state, x) {
            continue;
        }
        for &y in &receptacles {
            if into(x, y) && state.node(y).placement == Placement::In {
                out.push(Action::new(state, Predicate::PourInto, Some(x), Some(y)));
            }
        }
    }
    out
}

impl WorldState {
    /// Applies `action` in place (effect, then one thermodynamic tick) and
    /// returns the obs text. Actions outside the valid set leave the state
    /// untouched and return `RejectedAction`.
    pub fn apply(&mut self, action: &Action) -> Result<String, WorldError> {
        if !valid_actions(self).iter().any(|a| a.same_call(action)) {
            return Err(WorldError::RejectedAction(action.surface_text.clone()));
        }
        let obs = self.effect(action);
        tick_in_place(self);
        self.tick += 1;
        Ok(obs)
    }

    fn effect(&mut self, action: &Action) -> String {
        let arg = |id: Option<NodeId>| id.expect("validated arity");
        match action.predicate {
            Predicate::Look => render_look(self),
            Predicate::Inventory => render_inv(self),
            Predicate::Wait => "You decide to wait for 1 iterations.".to_string(),
            Predicate::Open | Predicate::Close => {
                let id = arg(action.arg1);
                let want = action.predicate == Predicate::Open;
                let word = if want { "open" } else { "closed" };
                let node = self.node_mut(id);
                if node.is_open == want {
                    format!("The {} is already {word}.", node.name)
                } else {
                    node.is_open = want;
                    format!("The {} is now {word}.", node.name)
                }
            }
            Predicate::Activate | Predicate::Deactivate => {
                let id = arg(action.arg1);
                let want = action.predicate == Predicate::Activate;
                let word = if want { "activated" } else { "deactivated" };
                let node = self.node_mut(id);
                if node.is_active == want {
                    format!("The {} is already {word}.", node.name)
                } else {
                    node.is_active = want;
                    format!("The {} is now {word}.", node.name)
                }
            }
            Predicate::PickUp => {
                let id = arg(action.arg1);
                let agent = self.agent_id;
                self.reparent(id, agent);
                format!("You move the {} to the inventory.", self.node(id).name)
            }
            Predicate::MoveTo => {
                let (x, y) = (arg(action.arg1), arg(action.arg2));
                if self.node(x).parent != Some(y) {
                    self.reparent(x, y);
                }
                format!("You move the {} to the {}.", self.node(x).name, self.node(y).name)
            }
            Predicate::PourInto => {
                let (x, y) = (arg(action.arg1), arg(action.arg2));
                let poured: Vec<NodeId> =
                    self.node(x).contents.iter().copied().filter(|c| !self.node(*c).part).collect();
                for c in poured {
                    self.reparent(c, y);
                }
                format!("You pour the contents of the {} into the {}.", self.node(x).name, self.node(y).name)
            }
        }
    }

    pub fn observe(&self, obs: String) -> Observation {
        Observation { obs, look: render_look(self), inv: render_inv(self) }
    }
}

/// Pure transition: returns the successor state and its observation.
pub fn step(state: &WorldState, action: &Action) -> Result<(WorldState, Observation), WorldError> {
    let mut next = state.clone();
    let obs = next.apply(action)?;
    let observation = next.observe(obs);
    Ok((next, observation))
}
