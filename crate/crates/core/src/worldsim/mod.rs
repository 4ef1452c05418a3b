//! Deterministic single-room kitchen simulator.
//!
//! The world is an object tree (room → furniture → receptacles → items and
//! substances) with an agent whose children form the inventory. Every step
//! applies one templated action, then one thermodynamic tick, and reports
//! three text channels: the action effect (`obs`), the room description
//! (`look`) and the inventory (`inv`).

mod actions;
mod render;
mod scenario;
mod state;
mod thermo;

use thiserror::Error;

pub use actions::{step, valid_actions, visible_nodes, Action, Predicate, REJECTED_OBS};
pub use render::{describe, render_inv, render_look, top_level_line, INVENTORY_HEADER};
pub use scenario::{NodeSpec, ScenarioConfig};
pub use state::{NodeId, NodeKind, ObjectNode, Observation, Physics, Placement, Role, WorldState};
pub use thermo::{apply_thermodynamics, ICE, STEAM, WATER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("scenario node `{node}`: unknown kind `{kind}`")]
    UnknownKind { node: String, kind: String },
    #[error("scenario node `{node}`: parent `{parent}` does not exist")]
    UnknownParent { node: String, parent: String },
    #[error("scenario node `{node}` is part of a containment cycle")]
    Cycle { node: String },
    #[error("scenario node id `{node}` is declared twice or reserved")]
    DuplicateNode { node: String },
    #[error("scenario node `{node}`: {reason}")]
    InvalidNode { node: String, reason: String },
    #[error("scenario has no agent node")]
    MissingAgent,
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("rejected action `{0}`")]
    RejectedAction(String),
    #[error("world invariant violated: {0}")]
    Invariant(String),
}

/// Builds the initial state of `scenario`. The layout itself is fixed by the
/// scenario; the seed is recorded on the state for bookkeeping.
pub fn reset(scenario: &ScenarioConfig, seed: u64) -> Result<(WorldState, Observation), WorldError> {
    let state = scenario.build(seed)?;
    let look = render_look(&state);
    let obs = state.observe(look);
    Ok((state, obs))
}
