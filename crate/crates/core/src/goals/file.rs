//! Line-oriented goal files: one goal per line, `#` comments, blank lines
//! ignored, and a `[hard]` line after which goals count as hard.

use std::path::Path;

use super::{Goal, GoalError, GoalOrigin, GoalSet, GoalSetRole};

/// The bundled canonical goal file.
pub const CANONICAL_GOALS_V1: &str = include_str!("../../data/goals_v1.txt");

const HARD_MARKER: &str = "[hard]";

#[derive(Debug, Clone, PartialEq)]
pub struct GoalFile {
    pub goals: GoalSet,
    /// Texts of the hard goals, in file order.
    pub hard: Vec<String>,
}

impl GoalFile {
    pub fn parse(text: &str) -> Result<Self, GoalError> {
        let mut goals = GoalSet::new(GoalSetRole::Sp);
        let mut hard = Vec::new();
        let mut in_hard = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            if line.trim() == HARD_MARKER {
                if in_hard {
                    return Err(GoalError::File { line: line_no, reason: "second [hard] marker".into() });
                }
                in_hard = true;
                continue;
            }
            if line.starts_with('[') {
                return Err(GoalError::File { line: line_no, reason: format!("unknown section {line:?}") });
            }
            if line != line.trim_start() {
                return Err(GoalError::File { line: line_no, reason: "leading whitespace".into() });
            }
            let goal = Goal::new(line, GoalOrigin::SpRelevant)?;
            if !goals.insert(goal) {
                return Err(GoalError::File { line: line_no, reason: format!("duplicate goal {line:?}") });
            }
            if in_hard {
                hard.push(line.to_string());
            }
        }
        if goals.is_empty() {
            return Err(GoalError::File { line: 0, reason: "no goals".into() });
        }
        Ok(Self { goals, hard })
    }

    pub fn load(path: &Path) -> Result<Self, GoalError> {
        let text = std::fs::read_to_string(path).map_err(|e| GoalError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn is_hard(&self, text: &str) -> bool {
        self.hard.iter().any(|h| h == text)
    }

    /// Serializes back to the file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in self.goals.iter().filter(|g| !self.is_hard(g.text())) {
            out.push_str(g.text());
            out.push('\n');
        }
        if !self.hard.is_empty() {
            out.push_str(HARD_MARKER);
            out.push('\n');
            for h in &self.hard {
                out.push_str(h);
                out.push('\n');
            }
        }
        out
    }
}

/// The canonical 14 goals with their hard subset.
pub fn canonical_goals() -> GoalFile {
    GoalFile::parse(CANONICAL_GOALS_V1).expect("bundled goal file parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_file_has_fourteen_goals_four_hard() {
        let f = canonical_goals();
        assert_eq!(f.goals.len(), 14);
        assert_eq!(f.hard.len(), 4);
        assert!(f.is_hard("a substance called steam"));
        assert!(!f.is_hard("a substance called water"));
        assert_eq!(
            f.goals.get_index(0).unwrap().text(),
            "a freezer. The freezer door is open. In the freezer is: nothing."
        );
    }

    #[test]
    fn round_trip_and_errors() {
        let f = canonical_goals();
        assert_eq!(GoalFile::parse(&f.to_text()).unwrap(), f);
        assert!(GoalFile::parse("# only comments\n").is_err());
        assert!(matches!(GoalFile::parse("a\na\n"), Err(GoalError::File { line: 2, .. })));
        assert!(GoalFile::parse("a\n[easy]\nb\n").is_err());
        assert!(GoalFile::parse("a\n[hard]\nb\n[hard]\nc\n").is_err());
        assert!(GoalFile::parse("  a\n").is_err());
    }
}
