use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::state::{NodeId, NodeKind, ObjectNode, Physics, Placement, Role, WorldState};
use super::WorldError;

const DEFAULT_KITCHEN: &str = include_str!("../../data/kitchen.toml");

/// Room layout: a flat list of nodes, each naming its parent (the room when
/// omitted). Contents keep file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default = "default_room")]
    pub room: String,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default, rename = "node")]
    pub nodes: Vec<NodeSpec>,
}

fn default_room() -> String {
    "kitchen".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default)]
    pub openable: bool,
    #[serde(default)]
    pub open: bool,
    #[serde(default)]
    pub activatable: bool,
    #[serde(default)]
    pub active: bool,
    #[serde(default)]
    pub portable: bool,
    #[serde(default)]
    pub part: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

impl NodeSpec {
    pub fn new(id: &str, kind: &str) -> Self {
        Self {
            id: id.to_string(),
            name: None,
            kind: kind.to_string(),
            parent: None,
            openable: false,
            open: false,
            activatable: false,
            active: false,
            portable: false,
            part: false,
            placement: None,
            role: None,
            temperature: None,
        }
    }
}

impl ScenarioConfig {
    /// The default kitchen: chair, counter (fruit bowl and cutlery), cupboard
    /// of cups and a pot, freezer, fridge, jar of salt, lighter, oven,
    /// painting, shelf, sink with drain, soap, stove, table with a glass cup,
    /// trash can and thermometer.
    pub fn kitchen() -> Self {
        Self::from_toml_str(DEFAULT_KITCHEN).expect("bundled kitchen scenario parses")
    }

    /// A room holding only the agent.
    pub fn empty_room() -> Self {
        Self { room: default_room(), physics: Physics::default(), nodes: vec![NodeSpec::new("agent", "agent")] }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, WorldError> {
        toml::from_str(text).map_err(|e| WorldError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, WorldError> {
        let text = std::fs::read_to_string(path).map_err(|e| WorldError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Builds the initial world state, validating kinds, flags and containment.
    pub fn build(&self, seed: u64) -> Result<WorldState, WorldError> {
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, spec) in self.nodes.iter().enumerate() {
            if spec.id == ROOM_KEY || index.insert(spec.id.as_str(), i).is_some() {
                return Err(WorldError::DuplicateNode { node: spec.id.clone() });
            }
        }

        // Parent indices (None = room root) and cycle detection.
        let mut parents: Vec<Option<usize>> = Vec::with_capacity(self.nodes.len());
        for spec in &self.nodes {
            let parent = match &spec.parent {
                None => None,
                Some(p) if p == ROOM_KEY => None,
                Some(p) => match index.get(p.as_str()) {
                    Some(&i) => Some(i),
                    None => return Err(WorldError::UnknownParent { node: spec.id.clone(), parent: p.clone() }),
                },
            };
            parents.push(parent);
        }
        for (i, spec) in self.nodes.iter().enumerate() {
            let mut cur = parents[i];
            let mut hops = 0;
            while let Some(p) = cur {
                if p == i || hops > self.nodes.len() {
                    return Err(WorldError::Cycle { node: spec.id.clone() });
                }
                hops += 1;
                cur = parents[p];
            }
        }

        let ambient = self.physics.ambient;
        let mut objects = BTreeMap::new();
        let root = NodeId(0);
        objects.insert(
            root,
            ObjectNode {
                id: root,
                key: Arc::from(ROOM_KEY),
                name: Arc::from(self.room.as_str()),
                kind: NodeKind::Room,
                openable: false,
                is_open: false,
                activatable: false,
                is_active: false,
                portable: false,
                part: false,
                placement: Placement::In,
                role: Role::None,
                temperature: None,
                parent: None,
                contents: Vec::new(),
            },
        );

        let mut agent = None;
        for (i, spec) in self.nodes.iter().enumerate() {
            let node_err = |reason: &str| WorldError::InvalidNode { node: spec.id.clone(), reason: reason.to_string() };
            let kind = NodeKind::parse(&spec.kind)
                .ok_or_else(|| WorldError::UnknownKind { node: spec.id.clone(), kind: spec.kind.clone() })?;
            if spec.open && !spec.openable {
                return Err(node_err("open requires openable"));
            }
            if spec.active && !spec.activatable {
                return Err(node_err("active requires activatable"));
            }
            let placement = match spec.placement.as_deref() {
                None if kind == NodeKind::Surface => Placement::On,
                None => Placement::In,
                Some("in") => Placement::In,
                Some("on") => Placement::On,
                Some(other) => return Err(node_err(&format!("unknown placement `{other}`"))),
            };
            let role = match spec.role.as_deref() {
                None | Some("none") => Role::None,
                Some("heater") => Role::Heater,
                Some("cooler") => Role::Cooler,
                Some("water_source") => Role::WaterSource,
                Some("drain") => Role::Drain,
                Some("igniter") => Role::Igniter,
                Some(other) => return Err(node_err(&format!("unknown role `{other}`"))),
            };
            let temperature = match kind {
                NodeKind::Substance | NodeKind::Container => Some(spec.temperature.unwrap_or(ambient)),
                _ if spec.temperature.is_some() => {
                    return Err(node_err("only substances and containers carry a temperature"))
                }
                _ => None,
            };
            if kind == NodeKind::Agent {
                if agent.is_some() {
                    return Err(node_err("a scenario holds exactly one agent"));
                }
                if parents[i].is_some() {
                    return Err(node_err("the agent must stand in the room"));
                }
                agent = Some(NodeId(i as u32 + 1));
            }
            if let Some(p) = parents[i] {
                let pk = NodeKind::parse(&self.nodes[p].kind);
                if matches!(pk, Some(NodeKind::Substance) | Some(NodeKind::Fixture)) {
                    return Err(node_err(&format!("parent `{}` cannot hold objects", self.nodes[p].id)));
                }
            }
            let id = NodeId(i as u32 + 1);
            objects.insert(
                id,
                ObjectNode {
                    id,
                    key: Arc::from(spec.id.as_str()),
                    name: Arc::from(spec.name.as_deref().unwrap_or(spec.id.as_str())),
                    kind,
                    openable: spec.openable,
                    is_open: spec.open,
                    activatable: spec.activatable,
                    is_active: spec.active,
                    portable: spec.portable,
                    part: spec.part,
                    placement,
                    role,
                    temperature,
                    parent: Some(parents[i].map_or(root, |p| NodeId(p as u32 + 1))),
                    contents: Vec::new(),
                },
            );
        }
        for i in 0..self.nodes.len() {
            let id = NodeId(i as u32 + 1);
            let parent = parents[i].map_or(root, |p| NodeId(p as u32 + 1));
            objects.get_mut(&parent).expect("parent built").contents.push(id);
        }

        let agent_id = agent.ok_or(WorldError::MissingAgent)?;
        let state = WorldState {
            objects,
            room_root: root,
            agent_id,
            tick: 0,
            next_id: self.nodes.len() as u32 + 1,
            room_name: Arc::from(self.room.as_str()),
            physics: self.physics,
            seed,
        };
        state.validate()?;
        Ok(state)
    }

    /// Every display name a scenario can produce, including phase products.
    pub fn all_names(&self) -> Vec<String> {
        let mut names: Vec<String> =
            self.nodes.iter().map(|n| n.name.clone().unwrap_or_else(|| n.id.clone())).collect();
        names.push(self.room.clone());
        for phase in super::thermo::PHASE_NAMES {
            names.push(phase.to_string());
        }
        names.sort();
        names.dedup();
        names
    }
}

const ROOM_KEY: &str = "room";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kitchen_builds_and_validates() {
        let s = ScenarioConfig::kitchen().build(0).unwrap();
        s.validate().unwrap();
        assert_eq!(s.node(s.agent_id()).kind, NodeKind::Agent);
        let cup = s.find_name("glass cup").unwrap();
        assert_eq!(s.node(cup).parent, s.find_key("table"));
    }

    #[test]
    fn unknown_kind_names_the_node() {
        let mut cfg = ScenarioConfig::empty_room();
        cfg.nodes.push(NodeSpec::new("blender", "appliance"));
        let err = cfg.build(0).unwrap_err();
        assert!(matches!(err, WorldError::UnknownKind { ref node, .. } if node == "blender"));
        assert!(err.to_string().contains("blender"));
    }

    #[test]
    fn cyclic_containment_is_rejected() {
        let mut cfg = ScenarioConfig::empty_room();
        let mut a = NodeSpec::new("box_a", "container");
        a.parent = Some("box_b".into());
        let mut b = NodeSpec::new("box_b", "container");
        b.parent = Some("box_a".into());
        cfg.nodes.extend([a, b]);
        let err = cfg.build(0).unwrap_err();
        assert!(matches!(err, WorldError::Cycle { ref node } if node == "box_a"));
    }

    #[test]
    fn flag_and_structure_errors() {
        let mut cfg = ScenarioConfig::empty_room();
        let mut door = NodeSpec::new("crate", "container");
        door.open = true;
        cfg.nodes.push(door);
        assert!(matches!(cfg.build(0), Err(WorldError::InvalidNode { .. })));

        let mut cfg = ScenarioConfig::empty_room();
        cfg.nodes.push(NodeSpec::new("salt", "substance"));
        let mut grain = NodeSpec::new("grain", "substance");
        grain.parent = Some("salt".into());
        cfg.nodes.push(grain);
        assert!(matches!(cfg.build(0), Err(WorldError::InvalidNode { ref node, .. }) if node == "grain"));

        let mut cfg = ScenarioConfig::empty_room();
        let mut orphan = NodeSpec::new("spoon", "fixture");
        orphan.parent = Some("drawer".into());
        cfg.nodes.push(orphan);
        assert!(matches!(cfg.build(0), Err(WorldError::UnknownParent { .. })));

        let cfg = ScenarioConfig { nodes: vec![], ..ScenarioConfig::empty_room() };
        assert!(matches!(cfg.build(0), Err(WorldError::MissingAgent)));

        let mut cfg = ScenarioConfig::empty_room();
        cfg.nodes.push(NodeSpec::new("agent", "fixture"));
        assert!(matches!(cfg.build(0), Err(WorldError::DuplicateNode { .. })));
    }

    #[test]
    fn toml_round_trip_preserves_layout() {
        let cfg = ScenarioConfig::kitchen();
        let text = toml::to_string(&cfg).unwrap();
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.build(3).unwrap(), back.build(3).unwrap());
    }
}
