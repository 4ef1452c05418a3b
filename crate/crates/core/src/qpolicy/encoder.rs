//! Feature-hashed bag-of-n-grams text encoder.
//!
//! Each text channel (obs, look, inv, goal, action) owns a region of
//! `2^bits` hashed features. A channel's unigrams and bigrams are hashed
//! with FNV-1a into its region and the region is L2-normalized, so every
//! non-empty channel contributes a unit-norm block.
//!
//! A sixth, goal-gap channel holds the goal's n-grams that do not occur in
//! the look: what is still missing for the goal to hold. It is empty when
//! every goal n-gram is already visible.

use serde::{Deserialize, Serialize};

/// Sparse vector: (feature index, value), indices strictly increasing.
pub type SparseVec = Vec<(u32, f64)>;

/// Pluggable encoder interface: a state-goal vector and an action vector
/// in one shared feature space.
pub trait TextEncoder {
    /// Total number of features.
    fn dim(&self) -> u32;
    fn encode_state(&self, obs: &str, look: &str, inv: &str, goal: &str) -> SparseVec;
    fn encode_action(&self, action: &str) -> SparseVec;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[repr(u32)]
pub enum Channel {
    Obs = 0,
    Look = 1,
    Inv = 2,
    Goal = 3,
    Action = 4,
    /// Goal n-grams absent from the look.
    GoalGap = 5,
}

pub const CHANNELS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashedEncoder {
    /// log2 of the region size per channel.
    pub bits: u32,
}

impl Default for HashedEncoder {
    fn default() -> Self {
        Self { bits: 16 }
    }
}

/// Lowercased tokens: alphanumeric runs, and each other non-space character
/// on its own (so "is:" gives "is", ":").
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            word.extend(c.to_lowercase());
            continue;
        }
        if !word.is_empty() {
            out.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            out.push(c.to_string());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

fn fnv1a(parts: &[&str]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            // Separator byte keeps ("ab","c") and ("a","bc") apart.
            h ^= 0xff;
            h = h.wrapping_mul(PRIME);
        }
        for b in p.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        }
    }
    h
}

impl HashedEncoder {
    pub fn new(bits: u32) -> Self {
        assert!((1..=24).contains(&bits), "encoder bits must be in 1..=24");
        Self { bits }
    }

    pub fn region_size(&self) -> u32 {
        1 << self.bits
    }

    /// Region-local feature indices (with multiplicity) of one text.
    pub fn hashed_ngrams(&self, text: &str) -> Vec<u32> {
        let mask = u64::from(self.region_size() - 1);
        let tokens = tokenize(text);
        let mut out: Vec<u32> = tokens.iter().map(|t| (fnv1a(&[t]) & mask) as u32).collect();
        out.extend(tokens.windows(2).map(|w| (fnv1a(&[&w[0], &w[1]]) & mask) as u32));
        out
    }

    /// The normalized block of `text` in `channel`'s region, sorted by index.
    pub fn encode_channel(&self, channel: Channel, text: &str) -> SparseVec {
        self.block_of(channel, self.hashed_ngrams(text))
    }

    /// The normalized goal-gap block: distinct goal n-grams whose hashes do
    /// not occur among the look's.
    pub fn encode_gap(&self, look: &str, goal: &str) -> SparseVec {
        let mut seen = self.hashed_ngrams(look);
        seen.sort_unstable();
        let mut gap: Vec<u32> =
            self.hashed_ngrams(goal).into_iter().filter(|i| seen.binary_search(i).is_err()).collect();
        gap.sort_unstable();
        gap.dedup();
        self.block_of(Channel::GoalGap, gap)
    }

    fn block_of(&self, channel: Channel, mut idx: Vec<u32>) -> SparseVec {
        idx.sort_unstable();
        let base = channel as u32 * self.region_size();
        let mut out = SparseVec::new();
        for i in idx {
            match out.last_mut() {
                Some((j, v)) if *j == base + i => *v += 1.0,
                _ => out.push((base + i, 1.0)),
            }
        }
        let norm = out.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        for (_, v) in &mut out {
            *v /= norm;
        }
        out
    }
}

impl TextEncoder for HashedEncoder {
    fn dim(&self) -> u32 {
        CHANNELS * self.region_size()
    }

    fn encode_state(&self, obs: &str, look: &str, inv: &str, goal: &str) -> SparseVec {
        let mut out: SparseVec =
            [(Channel::Obs, obs), (Channel::Look, look), (Channel::Inv, inv), (Channel::Goal, goal)]
                .into_iter()
                .flat_map(|(c, t)| self.encode_channel(c, t))
                .collect();
        out.extend(self.encode_gap(look, goal));
        out
    }

    fn encode_action(&self, action: &str) -> SparseVec {
        self.encode_channel(Channel::Action, action)
    }
}
