//! Text rendering of the object tree. The grammar here is a frozen contract:
//! goals are matched verbatim against `render_look` output.

use super::state::{NodeId, NodeKind, WorldState};

pub(crate) const INDENT: &str = "    ";
pub const INVENTORY_HEADER: &str = "In your inventory, you see:";

fn article(name: &str) -> &'static str {
    match name.chars().next() {
        Some(c) if "aeiouAEIOU".contains(c) => "an",
        _ => "a",
    }
}

/// Comma-separated descriptions of the listed (non-part) children, or "nothing".
fn contents_list(state: &WorldState, id: NodeId) -> String {
    let items: Vec<String> =
        state.node(id).contents.iter().filter(|c| !state.node(**c).part).map(|c| describe(state, *c)).collect();
    if items.is_empty() {
        "nothing".to_string()
    } else {
        items.join(", ")
    }
}

/// Inline description of a node, as used inside content lists.
pub fn describe(state: &WorldState, id: NodeId) -> String {
    let node = state.node(id);
    let name = &*node.name;
    let a = article(name);
    match node.kind {
        NodeKind::Agent => "the agent".to_string(),
        NodeKind::Room => format!("the {name}"),
        NodeKind::Substance => format!("a substance called {name}"),
        NodeKind::Fixture => format!("{a} {name}"),
        NodeKind::Container if node.openable => {
            if node.is_open {
                format!("{a} {name}. The {name} door is open. In the {name} is: {}", contents_list(state, id))
            } else {
                format!("{a} {name}. The {name} door is closed")
            }
        }
        NodeKind::Container => format!("{a} {name} (containing {})", contents_list(state, id)),
        NodeKind::Device => format!(
            "{a} {name}, which is turned {}. {} the {name} is: {}",
            if node.is_active { "on" } else { "off" },
            node.placement.capitalized(),
            contents_list(state, id)
        ),
        NodeKind::Surface => {
            format!("{a} {name}. {} the {name} is: {}", node.placement.capitalized(), contents_list(state, id))
        }
    }
}

/// One line of the room listing (without indentation).
pub fn top_level_line(state: &WorldState, id: NodeId) -> String {
    let node = state.node(id);
    let mut line = describe(state, id);
    let sentence = match node.kind {
        NodeKind::Device | NodeKind::Surface => true,
        NodeKind::Container => node.openable,
        _ => false,
    };
    if sentence {
        line.push('.');
    }
    line
}

/// The `look` channel: room header plus one indented line per top-level node.
pub fn render_look(state: &WorldState) -> String {
    let room = state.room_name();
    let mut out = String::with_capacity(768);
    let mut chars = room.chars();
    if let Some(first) = chars.next() {
        out.extend(first.to_uppercase());
        out.push_str(chars.as_str());
    }
    out.push_str("\nThis room is called the ");
    out.push_str(room);
    out.push_str(". In it, you see:");
    for &child in &state.node(state.room_root()).contents {
        if state.node(child).part {
            continue;
        }
        out.push('\n');
        out.push_str(INDENT);
        out.push_str(&top_level_line(state, child));
    }
    out
}

/// The `inv` channel.
pub fn render_inv(state: &WorldState) -> String {
    let mut out = String::from(INVENTORY_HEADER);
    let held = &state.node(state.agent_id()).contents;
    if held.is_empty() {
        out.push('\n');
        out.push_str(INDENT);
        out.push_str("nothing.");
    }
    for &id in held {
        out.push('\n');
        out.push_str(INDENT);
        let line = top_level_line(state, id);
        let ends = line.ends_with('.');
        out.push_str(&line);
        if !ends {
            out.push('.');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldsim::ScenarioConfig;

    #[test]
    fn articles() {
        assert_eq!(article("orange"), "an");
        assert_eq!(article("glass cup"), "a");
    }

    #[test]
    fn empty_room_lists_only_the_agent() {
        let s = ScenarioConfig::empty_room().build(0).unwrap();
        assert_eq!(render_look(&s), "Kitchen\nThis room is called the kitchen. In it, you see:\n    the agent");
        assert_eq!(render_inv(&s), "In your inventory, you see:\n    nothing.");
    }

    #[test]
    fn drain_is_never_listed() {
        let s = ScenarioConfig::kitchen().build(0).unwrap();
        assert!(!render_look(&s).contains("drain"));
    }
}
