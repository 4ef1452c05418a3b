use std::sync::Arc;

use super::state::{NodeId, NodeKind, ObjectNode, Placement, Role, WorldState};

pub const WATER: &str = "water";
pub const ICE: &str = "ice";
pub const STEAM: &str = "steam";
pub(crate) const PHASE_NAMES: [&str; 3] = [WATER, ICE, STEAM];

const FREEZING_POINT: f64 = 0.0;
const BOILING_POINT: f64 = 100.0;

#[derive(Clone, Copy, PartialEq)]
enum Exposure {
    Heated,
    Cooled,
    Ambient,
}

/// Nearest active heater or cooler above `id` decides how it is exposed.
fn exposure(state: &WorldState, id: NodeId) -> Exposure {
    let mut cur = state.node(id).parent;
    while let Some(p) = cur {
        let node = state.node(p);
        if node.is_active {
            match node.role {
                // A door left open lets the heat or cold escape.
                Role::Heater if !(node.openable && node.is_open) => return Exposure::Heated,
                Role::Cooler if !(node.openable && node.is_open) => return Exposure::Cooled,
                _ => {}
            }
        }
        cur = node.parent;
    }
    Exposure::Ambient
}

fn is_named(node: &ObjectNode, name: &str) -> bool {
    node.kind == NodeKind::Substance && &*node.name == name
}

fn water_node(state: &WorldState) -> ObjectNode {
    ObjectNode {
        id: NodeId(0),
        key: Arc::from(format!("water_{}", state.next_id).as_str()),
        name: Arc::from(WATER),
        kind: NodeKind::Substance,
        openable: false,
        is_open: false,
        activatable: false,
        is_active: false,
        portable: false,
        part: false,
        placement: Placement::In,
        role: Role::None,
        temperature: Some(state.physics.ambient),
        parent: None,
        contents: Vec::new(),
    }
}

/// One thermodynamic tick, applied in place after every action:
/// temperatures move, phases change, sinks fill and drains empty.
pub(crate) fn tick_in_place(state: &mut WorldState) {
    let physics = state.physics;

    // Temperatures.
    let warm: Vec<(NodeId, Exposure)> =
        state.objects.values().filter(|n| n.temperature.is_some()).map(|n| (n.id, exposure(state, n.id))).collect();
    for (id, exp) in warm {
        let node = state.node_mut(id);
        let t = node.temperature.expect("filtered on temperature");
        let next = match exp {
            Exposure::Heated => t + physics.heat_rate,
            Exposure::Cooled => t - physics.cool_rate,
            Exposure::Ambient if t > physics.ambient => (t - physics.relax_rate).max(physics.ambient),
            Exposure::Ambient => (t + physics.relax_rate).min(physics.ambient),
        };
        node.temperature = Some(next);
    }

    // Phase changes rename the substance in place.
    for node in state.objects.values_mut() {
        if node.kind != NodeKind::Substance {
            continue;
        }
        let Some(t) = node.temperature else { continue };
        let renamed = match &*node.name {
            WATER if t >= BOILING_POINT => Some(STEAM),
            WATER if t <= FREEZING_POINT => Some(ICE),
            ICE if t > FREEZING_POINT => Some(WATER),
            STEAM if t < BOILING_POINT => Some(WATER),
            _ => None,
        };
        if let Some(name) = renamed {
            node.name = Arc::from(name);
        }
    }

    // Water sources.
    let sinks: Vec<NodeId> = state.objects.values().filter(|n| n.role == Role::WaterSource).map(|n| n.id).collect();
    for sink in sinks {
        let drain_open = state
            .node(sink)
            .contents
            .iter()
            .map(|c| state.node(*c))
            .find(|c| c.role == Role::Drain)
            .map_or(true, |d| d.is_open);

        if drain_open {
            let drained: Vec<NodeId> =
                state.node(sink).contents.iter().copied().filter(|c| is_named(state.node(*c), WATER)).collect();
            for id in drained {
                state.remove_node(id);
            }
        }

        if !state.node(sink).is_active {
            continue;
        }
        let mut targets: Vec<NodeId> = state
            .node(sink)
            .contents
            .iter()
            .copied()
            .filter(|c| {
                let n = state.node(*c);
                n.kind == NodeKind::Container && n.exposes_contents()
            })
            .collect();
        if !drain_open {
            targets.insert(0, sink);
        }
        for target in targets {
            let has_water = state.node(target).contents.iter().any(|c| is_named(state.node(*c), WATER));
            if !has_water {
                let water = water_node(state);
                state.insert_node(water, target);
            }
        }
    }
}

/// Pure form of the thermodynamic tick.
pub fn apply_thermodynamics(state: &WorldState) -> WorldState {
    let mut next = state.clone();
    tick_in_place(&mut next);
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldsim::{render_look, ScenarioConfig};

    fn kitchen() -> WorldState {
        ScenarioConfig::kitchen().build(0).unwrap()
    }

    fn put_water_in_cup(s: &mut WorldState) -> NodeId {
        let cup = s.find_name("glass cup").unwrap();
        let w = water_node(s);
        s.insert_node(w, cup);
        cup
    }

    #[test]
    fn stove_boils_water_after_four_ticks() {
        let mut s = kitchen();
        let cup = put_water_in_cup(&mut s);
        let stove = s.find_name("stove").unwrap();
        s.node_mut(stove).is_active = true;
        s.reparent(cup, stove);
        for tick in 1..=4 {
            s = apply_thermodynamics(&s);
            let look = render_look(&s);
            assert_eq!(look.contains("a substance called steam"), tick == 4, "tick {tick}");
        }
        assert!(render_look(&s).contains(
            "a stove, which is turned on. On the stove is: a glass cup (containing a substance called steam)."
        ));
    }

    #[test]
    fn freezer_makes_ice_in_one_tick() {
        let mut s = kitchen();
        let cup = put_water_in_cup(&mut s);
        let freezer = s.find_name("freezer").unwrap();
        s.reparent(cup, freezer);
        s = apply_thermodynamics(&s);
        let water = s.node(cup).contents[0];
        assert_eq!(&*s.node(water).name, ICE);
        assert_eq!(s.node(water).temperature, Some(-5.0));
    }

    #[test]
    fn relaxation_never_overshoots_ambient() {
        let mut s = kitchen();
        let cup = put_water_in_cup(&mut s);
        let water = s.node(cup).contents[0];
        s.node_mut(water).temperature = Some(37.0);
        let mut seen = vec![];
        for _ in 0..6 {
            s = apply_thermodynamics(&s);
            seen.push(s.node(water).temperature.unwrap());
        }
        assert_eq!(seen, vec![32.0, 27.0, 22.0, 20.0, 20.0, 20.0]);
        s.node_mut(water).temperature = Some(18.0);
        s = apply_thermodynamics(&s);
        assert_eq!(s.node(water).temperature, Some(20.0));
    }

    #[test]
    fn ice_melts_and_steam_condenses_away_from_devices() {
        let mut s = kitchen();
        let cup = put_water_in_cup(&mut s);
        let water = s.node(cup).contents[0];
        s.node_mut(water).name = Arc::from(ICE);
        s.node_mut(water).temperature = Some(-5.0);
        s = apply_thermodynamics(&s); // 0: still ice
        assert_eq!(&*s.node(water).name, ICE);
        s = apply_thermodynamics(&s); // 5: melts
        assert_eq!(&*s.node(water).name, WATER);

        s.node_mut(water).name = Arc::from(STEAM);
        s.node_mut(water).temperature = Some(102.0);
        s = apply_thermodynamics(&s);
        assert_eq!(&*s.node(water).name, WATER);
    }

    #[test]
    fn sink_fills_basin_only_with_closed_drain() {
        let mut s = kitchen();
        let sink = s.find_name("sink").unwrap();
        let drain = s.find_name("drain").unwrap();
        s.node_mut(sink).is_active = true;
        s = apply_thermodynamics(&s);
        assert!(render_look(&s).contains("a sink, which is turned on. In the sink is: nothing."));

        s.node_mut(drain).is_open = false;
        let before = s.objects().len();
        s = apply_thermodynamics(&s);
        assert_eq!(s.objects().len(), before + 1);
        assert!(render_look(&s).contains("a sink, which is turned on. In the sink is: a substance called water."));
        // No second water node while one is present.
        s = apply_thermodynamics(&s);
        assert_eq!(s.objects().len(), before + 1);

        s.node_mut(drain).is_open = true;
        s = apply_thermodynamics(&s);
        assert_eq!(s.objects().len(), before);
        s.validate().unwrap();
    }

    #[test]
    fn containers_in_an_active_basin_fill() {
        let mut s = kitchen();
        let sink = s.find_name("sink").unwrap();
        let cup = s.find_name("glass cup").unwrap();
        s.reparent(cup, sink);
        s = apply_thermodynamics(&s);
        assert!(s.node(cup).contents.is_empty(), "inactive sink adds nothing");
        s.node_mut(sink).is_active = true;
        s = apply_thermodynamics(&s);
        assert!(render_look(&s).contains(
            "a sink, which is turned on. In the sink is: a glass cup (containing a substance called water)."
        ));
    }

    #[test]
    fn open_doors_let_heat_and_cold_escape() {
        let mut s = kitchen();
        let cup = put_water_in_cup(&mut s);
        let water = s.node(cup).contents[0];
        let freezer = s.find_name("freezer").unwrap();
        s.node_mut(freezer).is_open = true;
        s.reparent(cup, freezer);
        s = apply_thermodynamics(&s);
        assert_eq!(s.node(water).temperature, Some(20.0));

        let oven = s.find_name("oven").unwrap();
        s.node_mut(oven).is_open = true;
        s.node_mut(oven).is_active = true;
        s.reparent(cup, oven);
        s = apply_thermodynamics(&s);
        assert_eq!(s.node(water).temperature, Some(20.0));
        s.node_mut(oven).is_open = false;
        s = apply_thermodynamics(&s);
        assert_eq!(s.node(water).temperature, Some(45.0));
    }
}
