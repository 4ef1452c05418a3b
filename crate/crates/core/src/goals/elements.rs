//! Splits a room description into its description elements: every object
//! description at every nesting level.
//!
//! Element grammar (inline forms, as produced by the renderer):
//!
//! ```text
//! item  := "the agent" | "a substance called NAME"
//!        | ART NAME " (containing " list ")"                    portable container
//!        | ART NAME ", which is turned " STATE ". " PLACE list   device
//!        | ART NAME ". The NAME door is closed"                  closed container
//!        | ART NAME ". The NAME door is open. " PLACE list       open container
//!        | ART NAME ". " PLACE list                              surface
//!        | ART NAME                                              plain object
//! list  := "nothing" | item (", " item)*
//! ```
//!
//! A top-level line is an item, followed by "." for devices, surfaces and
//! doored containers; the element keeps that period. A list introduced by
//! " is: " runs to the end of its enclosing item, so nested devices or
//! surfaces (which the kitchen never produces) swallow the rest of a list.

const HEADER_MARK: &str = "This room is called the ";

/// Parse result: the elements in order of first appearance, or an empty list
/// and a diagnostic for text the grammar does not cover.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ElementParse {
    pub elements: Vec<String>,
    pub diagnostic: Option<String>,
}

/// Description elements of a look text (or of bare description lines).
pub fn enumerate_description_elements(look: &str) -> ElementParse {
    let mut lines: Vec<&str> = look.lines().collect();
    if let Some(pos) = lines.iter().position(|l| l.starts_with(HEADER_MARK)) {
        if pos > 1 {
            return malformed(format!("unexpected text before the room header: {:?}", lines[0]));
        }
        lines.drain(..=pos);
    }
    let mut out: Vec<String> = Vec::new();
    for raw in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let item = strip_sentence_period(line);
        let first = out.len();
        if let Err(e) = collect(item, &mut out) {
            return malformed(format!("{e} in line {line:?}"));
        }
        // The top-level element keeps its sentence period.
        out[first] = line.to_string();
    }
    let mut seen = std::collections::BTreeSet::new();
    out.retain(|e| seen.insert(e.clone()));
    ElementParse { elements: out, diagnostic: None }
}

fn malformed(reason: String) -> ElementParse {
    ElementParse { elements: Vec::new(), diagnostic: Some(reason) }
}

/// Top-level sentence lines end in "."; inline items never do.
fn strip_sentence_period(line: &str) -> &str {
    line.strip_suffix('.').unwrap_or(line)
}

/// Adds `item` and every nested item to `out`.
fn collect(item: &str, out: &mut Vec<String>) -> Result<(), String> {
    if item.is_empty() {
        return Err("empty item".into());
    }
    if !(item.starts_with("a ") || item.starts_with("an ") || item.starts_with("the ")) {
        return Err(format!("item {item:?} does not start with an article"));
    }
    check_balanced(item)?;
    out.push(item.to_string());

    if let Some(rest) = item.strip_prefix("a substance called ") {
        if rest.contains(['(', ')', ',']) || rest.contains(". ") {
            return Err(format!("substance name {rest:?} is not a plain name"));
        }
        return Ok(());
    }

    // " is: " at depth 0 opens a list running to the end of the item.
    if let Some(pos) = find_depth0(item, " is: ") {
        let list = &item[pos + " is: ".len()..];
        return collect_list(list, out);
    }
    // Otherwise the item may end in a parenthesised contents list.
    if item.ends_with(')') {
        let open = matching_open(item).ok_or("unbalanced parentheses")?;
        let head = &item[..open];
        let inner = &item[open + 1..item.len() - 1];
        if !head.ends_with(' ') {
            return Err("contents list not preceded by a space".into());
        }
        let list = inner
            .strip_prefix("containing ")
            .ok_or_else(|| format!("parenthesised text {inner:?} is not a contents list"))?;
        return collect_list(list, out);
    }
    if item.contains(['(', ')']) {
        return Err("parenthesis outside a contents list".into());
    }
    if item.contains(',') {
        return Err(format!("stray comma in {item:?}"));
    }
    if let Some((_, sentence)) = item.split_once(". ") {
        if !(sentence.starts_with("The ") && sentence.ends_with(" door is closed")) {
            return Err(format!("unknown sentence {sentence:?}"));
        }
    }
    Ok(())
}

fn collect_list(list: &str, out: &mut Vec<String>) -> Result<(), String> {
    if list == "nothing" {
        return Ok(());
    }
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = list.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b',' if depth == 0 && bytes.get(i + 1) == Some(&b' ') => {
                let piece = &list[start..i];
                if find_depth0(piece, " is: ").is_some() {
                    // This item owns the rest of the list.
                    return collect(&list[start..], out);
                }
                collect(piece, out)?;
                start = i + 2;
                i += 1;
            }
            _ => {}
        }
        i += 1;
    }
    collect(&list[start..], out)
}

fn find_depth0(s: &str, needle: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ if depth == 0 && s[i..].starts_with(needle) => return Some(i),
            _ => {}
        }
    }
    None
}

fn matching_open(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices().rev() {
        match c {
            ')' => depth += 1,
            '(' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn check_balanced(s: &str) -> Result<(), String> {
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err("unbalanced parentheses".into());
                }
            }
            _ => {}
        }
    }
    if depth == 0 {
        Ok(())
    } else {
        Err("unbalanced parentheses".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bowl_line_yields_bowl_and_fruit() {
        let p = enumerate_description_elements("a bowl (containing a red apple, a banana, an orange, a potato)");
        assert_eq!(p.diagnostic, None);
        assert_eq!(
            p.elements,
            [
                "a bowl (containing a red apple, a banana, an orange, a potato)",
                "a red apple",
                "a banana",
                "an orange",
                "a potato"
            ]
        );
    }

    #[test]
    fn leaf_is_itself() {
        let p = enumerate_description_elements("a substance called soap");
        assert_eq!(p.elements, ["a substance called soap"]);
    }

    #[test]
    fn sentence_lines_keep_their_period() {
        let p = enumerate_description_elements(
            "a table. On the table is: a glass cup (containing a substance called water).",
        );
        assert_eq!(
            p.elements,
            [
                "a table. On the table is: a glass cup (containing a substance called water).",
                "a glass cup (containing a substance called water)",
                "a substance called water"
            ]
        );
        let p = enumerate_description_elements("a freezer. The freezer door is closed.");
        assert_eq!(p.elements, ["a freezer. The freezer door is closed."]);
    }

    #[test]
    fn duplicates_collapse() {
        let p = enumerate_description_elements(
            "a sink, which is turned on. In the sink is: a bowl (containing a substance called water), a substance called water.",
        );
        assert_eq!(p.elements.len(), 3);
    }

    #[test]
    fn malformed_text_gives_diagnostic() {
        for bad in [
            "a bowl (containing a banana",
            "banana",
            "a bowl (holding a banana)",
            "a cup (containing a fork,, a knife)",
        ] {
            let p = enumerate_description_elements(bad);
            assert!(p.elements.is_empty(), "{bad}");
            assert!(p.diagnostic.is_some(), "{bad}");
        }
    }
}
