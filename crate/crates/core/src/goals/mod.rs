//! Goals, the internal reward function and the social peer.
//!
//! A goal is a piece of room description. It is achieved when its text
//! appears verbatim in the `look` channel. The social peer relabels finished
//! trajectories with the goals they achieved: only goals from a reference set
//! (selective), every description element seen (exhaustive), or nothing.

mod elements;
mod file;
mod nonsense;

use std::borrow::Borrow;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use elements::{enumerate_description_elements, ElementParse};
pub use file::{canonical_goals, GoalFile, CANONICAL_GOALS_V1};
pub use nonsense::{gen_nonsense_goals, gen_nonsense_goals_avoiding, NONSENSE_PREFIX};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GoalError {
    #[error("goal text is empty")]
    EmptyGoal,
    #[error("goal file line {line}: {reason}")]
    File { line: usize, reason: String },
    #[error("selective relabeling needs a non-empty reference set")]
    EmptyReference,
    #[error("cannot read goal file: {0}")]
    Io(String),
}

/// Where a goal came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalOrigin {
    /// Part of the social peer's reference set.
    SpRelevant,
    /// Returned by relabeling outside any reference set.
    Discovered,
    /// Made-up, unachievable goal.
    Nonsense,
    /// Handed to the agent from outside.
    Extrinsic,
}

/// A goal. Equality and hashing use the text only.
#[derive(Clone, Serialize, Deserialize)]
pub struct Goal {
    text: Arc<str>,
    pub origin: GoalOrigin,
}

impl Goal {
    pub fn new(text: &str, origin: GoalOrigin) -> Result<Self, GoalError> {
        if text.is_empty() {
            return Err(GoalError::EmptyGoal);
        }
        Ok(Self { text: Arc::from(text), origin })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Shared handle to the text, cheap to clone into buffers and indexes.
    pub fn text_arc(&self) -> &Arc<str> {
        &self.text
    }
}

impl PartialEq for Goal {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Eq for Goal {}

impl Hash for Goal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.text.hash(state);
    }
}

impl Borrow<str> for Goal {
    fn borrow(&self) -> &str {
        &self.text
    }
}

impl fmt::Debug for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Goal({:?}, {:?})", &*self.text, self.origin)
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Which goal set a `GoalSet` stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalSetRole {
    /// Goals relevant to the social peer.
    Sp,
    /// Goals the agent has discovered so far.
    Agent,
    /// Every goal.
    All,
}

/// Insertion-ordered set of goals without duplicate texts.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalSet {
    pub role: GoalSetRole,
    goals: IndexSet<Goal>,
}

impl GoalSet {
    pub fn new(role: GoalSetRole) -> Self {
        Self { role, goals: IndexSet::new() }
    }

    pub fn from_goals(role: GoalSetRole, goals: impl IntoIterator<Item = Goal>) -> Self {
        let mut set = Self::new(role);
        set.extend(goals);
        set
    }

    /// Adds `goal`; returns false (keeping the first copy) if its text is present.
    pub fn insert(&mut self, goal: Goal) -> bool {
        self.goals.insert(goal)
    }

    pub fn extend(&mut self, goals: impl IntoIterator<Item = Goal>) {
        for g in goals {
            self.insert(g);
        }
    }

    pub fn contains(&self, text: &str) -> bool {
        self.goals.contains(text)
    }

    pub fn get(&self, text: &str) -> Option<&Goal> {
        self.goals.get(text)
    }

    pub fn get_index(&self, i: usize) -> Option<&Goal> {
        self.goals.get_index(i)
    }

    pub fn index_of(&self, text: &str) -> Option<usize> {
        self.goals.get_index_of(text)
    }

    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Goal> {
        self.goals.iter()
    }

    pub fn texts(&self) -> Vec<String> {
        self.goals.iter().map(|g| g.text().to_string()).collect()
    }
}

impl<'a> IntoIterator for &'a GoalSet {
    type Item = &'a Goal;
    type IntoIter = indexmap::set::Iter<'a, Goal>;

    fn into_iter(self) -> Self::IntoIter {
        self.goals.iter()
    }
}

/// How the social peer relabels trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelabelMode {
    Selective,
    Exhaustive,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelabelPolicy {
    pub mode: RelabelMode,
    reference: GoalSet,
}

impl RelabelPolicy {
    pub fn new(mode: RelabelMode, reference: GoalSet) -> Result<Self, GoalError> {
        if mode == RelabelMode::Selective && reference.is_empty() {
            return Err(GoalError::EmptyReference);
        }
        Ok(Self { mode, reference })
    }

    pub fn selective(reference: GoalSet) -> Result<Self, GoalError> {
        Self::new(RelabelMode::Selective, reference)
    }

    pub fn exhaustive() -> Self {
        Self { mode: RelabelMode::Exhaustive, reference: GoalSet::new(GoalSetRole::Sp) }
    }

    pub fn none() -> Self {
        Self { mode: RelabelMode::None, reference: GoalSet::new(GoalSetRole::Sp) }
    }

    pub fn reference(&self) -> &GoalSet {
        &self.reference
    }
}

/// Internal reward: 1 iff the goal text occurs verbatim in the look text.
pub fn reward(look: &str, goal: &Goal) -> u8 {
    reward_text(look, goal.text())
}

/// `reward` on a bare goal string.
pub fn reward_text(look: &str, goal: &str) -> u8 {
    look.contains(goal) as u8
}

/// Social-peer feedback on a trajectory, given the look text after each of
/// its actions. A goal is returned if it is achieved at any of those steps.
///
/// Only post-action looks are scanned, so every returned goal has at least
/// one transition with reward 1.
pub fn relabel<S: AsRef<str>>(looks: &[S], policy: &RelabelPolicy) -> GoalSet {
    match policy.mode {
        RelabelMode::None => GoalSet::new(GoalSetRole::Agent),
        RelabelMode::Selective => GoalSet::from_goals(
            GoalSetRole::Agent,
            policy.reference.iter().filter(|g| looks.iter().any(|l| reward(l.as_ref(), g) == 1)).cloned(),
        ),
        RelabelMode::Exhaustive => {
            let mut out = GoalSet::new(GoalSetRole::Agent);
            for look in looks {
                for text in enumerate_description_elements(look.as_ref()).elements {
                    if !out.contains(&text) {
                        let origin = match policy.reference.get(&text) {
                            Some(g) => g.origin,
                            None => GoalOrigin::Discovered,
                        };
                        out.insert(Goal { text: Arc::from(text), origin });
                    }
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(text: &str) -> Goal {
        Goal::new(text, GoalOrigin::SpRelevant).unwrap()
    }

    #[test]
    fn goal_equality_is_textual() {
        let a = Goal::new("a substance called water", GoalOrigin::SpRelevant).unwrap();
        let b = Goal::new("a substance called water", GoalOrigin::Discovered).unwrap();
        assert_eq!(a, b);
        assert!(Goal::new("", GoalOrigin::Extrinsic).is_err());
        let set = GoalSet::from_goals(GoalSetRole::Agent, [a, b]);
        assert_eq!(set.len(), 1);
        assert_eq!(set.get_index(0).unwrap().origin, GoalOrigin::SpRelevant);
    }

    #[test]
    fn reward_is_verbatim_substring() {
        let look =
            "Kitchen\nThis room is called the kitchen. In it, you see:\n    the agent\n    a substance called water";
        assert_eq!(reward(look, &g("a substance called water")), 1);
        assert_eq!(reward(look, &g("the agent")), 1);
        assert_eq!(reward(look, &g("a substance called steam")), 0);
        assert_eq!(reward(look, &g("A substance called water")), 0);
        assert_eq!(reward(look, &g("a substance called  water")), 0);
    }

    #[test]
    fn selective_needs_reference() {
        assert_eq!(RelabelPolicy::selective(GoalSet::new(GoalSetRole::Sp)), Err(GoalError::EmptyReference));
    }

    #[test]
    fn relabel_modes() {
        let looks = ["x a substance called water y", "nothing here"];
        let reference =
            GoalSet::from_goals(GoalSetRole::Sp, [g("a substance called water"), g("a substance called ice")]);
        let sel = relabel(&looks, &RelabelPolicy::selective(reference).unwrap());
        assert_eq!(sel.texts(), ["a substance called water"]);
        assert!(relabel(&looks, &RelabelPolicy::none()).is_empty());
        let empty: [&str; 0] = [];
        assert!(relabel(&empty, &RelabelPolicy::exhaustive()).is_empty());
    }
}
