use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::WorldError;

/// Arena index of an object node. Scenario nodes are numbered in file order
/// after the room root (which is always `NodeId(0)`); nodes created by the
/// simulation get fresh, strictly increasing ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    /// The room itself; only ever the tree root.
    Room,
    Container,
    Device,
    Substance,
    Surface,
    Agent,
    /// A plain object without contents (fruit, drain, ...).
    Fixture,
}

impl NodeKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "container" => Some(Self::Container),
            "device" => Some(Self::Device),
            "substance" => Some(Self::Substance),
            "surface" => Some(Self::Surface),
            "agent" => Some(Self::Agent),
            "fixture" => Some(Self::Fixture),
            _ => None,
        }
    }
}

/// Preposition used when listing what a device or surface holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    In,
    On,
}

impl Placement {
    pub fn capitalized(self) -> &'static str {
        match self {
            Placement::In => "In",
            Placement::On => "On",
        }
    }
}

/// Physical behaviour attached to a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    None,
    /// Warms everything it holds while active and, if it has a door, closed
    /// (stove, oven). Lights only while the agent holds an igniter.
    Heater,
    /// Cools everything it holds while active and closed (freezer).
    Cooler,
    /// Produces water while active (sink).
    WaterSource,
    /// Open drain empties the water source it belongs to.
    Drain,
    /// Carried to light heaters (lighter).
    Igniter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectNode {
    pub id: NodeId,
    /// Scenario token, unique per state.
    pub key: Arc<str>,
    /// Display name, e.g. "glass cup".
    pub name: Arc<str>,
    pub kind: NodeKind,
    pub openable: bool,
    pub is_open: bool,
    pub activatable: bool,
    pub is_active: bool,
    pub portable: bool,
    /// Fixed parts (the sink's drain) are actionable but never listed as contents.
    pub part: bool,
    pub placement: Placement,
    pub role: Role,
    /// Degrees Celsius; only substances and containers carry one.
    pub temperature: Option<f64>,
    pub parent: Option<NodeId>,
    pub contents: Vec<NodeId>,
}

impl ObjectNode {
    /// Whether things inside this node can be seen and reached.
    pub fn exposes_contents(&self) -> bool {
        match self.kind {
            NodeKind::Room | NodeKind::Agent | NodeKind::Surface | NodeKind::Device => true,
            NodeKind::Container => !self.openable || self.is_open,
            NodeKind::Substance | NodeKind::Fixture => false,
        }
    }

    /// Whether portable objects may be put into (or onto) this node.
    pub fn accepts_items(&self) -> bool {
        matches!(self.kind, NodeKind::Container | NodeKind::Surface | NodeKind::Device) && self.exposes_contents()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Physics {
    pub heat_rate: f64,
    pub cool_rate: f64,
    pub relax_rate: f64,
    pub ambient: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Self { heat_rate: 25.0, cool_rate: 25.0, relax_rate: 5.0, ambient: 20.0 }
    }
}

/// Full simulator state. Cloning is cheap (a few dozen small nodes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub(crate) objects: BTreeMap<NodeId, ObjectNode>,
    pub(crate) room_root: NodeId,
    pub(crate) agent_id: NodeId,
    pub(crate) tick: u64,
    pub(crate) next_id: u32,
    pub(crate) room_name: Arc<str>,
    pub(crate) physics: Physics,
    pub(crate) seed: u64,
}

/// The three text channels returned after every reset and step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub obs: String,
    pub look: String,
    pub inv: String,
}

impl WorldState {
    pub fn objects(&self) -> &BTreeMap<NodeId, ObjectNode> {
        &self.objects
    }

    pub fn room_root(&self) -> NodeId {
        self.room_root
    }

    pub fn agent_id(&self) -> NodeId {
        self.agent_id
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn room_name(&self) -> &str {
        &self.room_name
    }

    pub fn physics(&self) -> &Physics {
        &self.physics
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Panics on a dangling id; ids handed out by this state are always live.
    pub fn node(&self, id: NodeId) -> &ObjectNode {
        &self.objects[&id]
    }

    pub fn get(&self, id: NodeId) -> Option<&ObjectNode> {
        self.objects.get(&id)
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut ObjectNode {
        self.objects.get_mut(&id).expect("live node id")
    }

    /// First node whose scenario key matches.
    pub fn find_key(&self, key: &str) -> Option<NodeId> {
        self.objects.values().find(|n| &*n.key == key).map(|n| n.id)
    }

    /// First node whose display name matches.
    pub fn find_name(&self, name: &str) -> Option<NodeId> {
        self.objects.values().find(|n| &*n.name == name).map(|n| n.id)
    }

    /// True when `node` sits somewhere below `ancestor` (strictly).
    pub fn is_descendant(&self, node: NodeId, ancestor: NodeId) -> bool {
        let mut cur = self.node(node).parent;
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.node(p).parent;
        }
        false
    }

    pub(crate) fn detach(&mut self, id: NodeId) {
        if let Some(parent) = self.node(id).parent {
            self.node_mut(parent).contents.retain(|c| *c != id);
        }
        self.node_mut(id).parent = None;
    }

    pub(crate) fn attach(&mut self, id: NodeId, parent: NodeId) {
        self.node_mut(parent).contents.push(id);
        self.node_mut(id).parent = Some(parent);
    }

    /// Moves `id` under `parent`, appending it to the parent's contents.
    pub(crate) fn reparent(&mut self, id: NodeId, parent: NodeId) {
        self.detach(id);
        self.attach(id, parent);
    }

    pub(crate) fn insert_node(&mut self, mut node: ObjectNode, parent: NodeId) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        node.id = id;
        node.parent = None;
        self.objects.insert(id, node);
        self.attach(id, parent);
        id
    }

    pub(crate) fn remove_node(&mut self, id: NodeId) {
        let children = self.node(id).contents.clone();
        for c in children {
            self.remove_node(c);
        }
        self.detach(id);
        self.objects.remove(&id);
    }

    /// Checks the structural invariants of the object tree.
    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |msg: String| Err(WorldError::Invariant(msg));
        let root = match self.objects.get(&self.room_root) {
            Some(r) => r,
            None => return bad("room root missing".into()),
        };
        if root.parent.is_some() {
            return bad("room root has a parent".into());
        }
        for node in self.objects.values() {
            if node.is_open && !node.openable {
                return bad(format!("{} is open but not openable", node.key));
            }
            if node.is_active && !node.activatable {
                return bad(format!("{} is active but not activatable", node.key));
            }
            if node.kind == NodeKind::Substance && !node.contents.is_empty() {
                return bad(format!("substance {} has contents", node.key));
            }
            if node.id != self.room_root {
                let Some(parent) = node.parent else {
                    return bad(format!("{} is orphaned", node.key));
                };
                let Some(p) = self.objects.get(&parent) else {
                    return bad(format!("{} has a dangling parent", node.key));
                };
                if p.contents.iter().filter(|c| **c == node.id).count() != 1 {
                    return bad(format!("{} is not listed exactly once by its parent", node.key));
                }
                // Walking up must reach the root within |objects| hops.
                let mut hops = 0;
                let mut cur = node.parent;
                while let Some(c) = cur {
                    if c == node.id || hops > self.objects.len() {
                        return bad(format!("{} is its own ancestor", node.key));
                    }
                    hops += 1;
                    cur = self.objects.get(&c).and_then(|n| n.parent);
                }
            }
            for c in &node.contents {
                match self.objects.get(c) {
                    Some(child) if child.parent == Some(node.id) => {}
                    _ => return bad(format!("{} lists a foreign child {c}", node.key)),
                }
            }
        }
        let agent = match self.objects.get(&self.agent_id) {
            Some(a) => a,
            None => return bad("agent missing".into()),
        };
        if agent.kind != NodeKind::Agent || agent.parent != Some(self.room_root) {
            return bad("agent must be an agent node directly in the room".into());
        }
        Ok(())
    }
}
