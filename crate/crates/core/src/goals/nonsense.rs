//! Made-up, unachievable goals of the form "a substance called <word>".

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Goal, GoalOrigin};
use crate::worldsim::ScenarioConfig;

pub const NONSENSE_PREFIX: &str = "a substance called ";

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// `n` distinct nonsense goals whose words match no name of the default kitchen.
pub fn gen_nonsense_goals(n: usize, seed: u64) -> Vec<Goal> {
    gen_nonsense_goals_avoiding(n, seed, &ScenarioConfig::kitchen().all_names())
}

/// `n` distinct nonsense goals; a word is rejected when any forbidden name
/// starts with it, so the goal can never be a substring of a rendering of
/// those names. Words are 2 to 4 consonant-vowel syllables.
pub fn gen_nonsense_goals_avoiding(n: usize, seed: u64, forbidden: &[String]) -> Vec<Goal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words: Vec<String> = Vec::with_capacity(n);
    while words.len() < n {
        let syllables = rng.gen_range(2..=4);
        let mut word = String::with_capacity(2 * syllables);
        for _ in 0..syllables {
            word.push(CONSONANTS[rng.gen_range(0..CONSONANTS.len())] as char);
            word.push(VOWELS[rng.gen_range(0..VOWELS.len())] as char);
        }
        let clashes = forbidden.iter().any(|name| name.starts_with(&word));
        if !clashes && !words.contains(&word) {
            words.push(word);
        }
    }
    words
        .into_iter()
        .map(|w| {
            Goal::new(&format!("{NONSENSE_PREFIX}{w}"), GoalOrigin::Nonsense).expect("nonsense goal text is non-empty")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_distinct_and_prefixed() {
        let a = gen_nonsense_goals(100, 7);
        let b = gen_nonsense_goals(100, 7);
        assert_eq!(a, b);
        let mut texts: Vec<&str> = a.iter().map(|g| g.text()).collect();
        texts.sort();
        texts.dedup();
        assert_eq!(texts.len(), 100);
        assert_ne!(a, gen_nonsense_goals(100, 8));
        let one = gen_nonsense_goals(1, 0);
        assert!(one[0].text().starts_with("a substance called "));
        assert_eq!(one[0].origin, GoalOrigin::Nonsense);
    }

    #[test]
    fn avoids_forbidden_prefixes() {
        let forbidden = vec!["bababa".to_string()];
        for g in gen_nonsense_goals_avoiding(2000, 3, &forbidden) {
            let w = g.text().strip_prefix(NONSENSE_PREFIX).unwrap();
            assert!(!"bababa".starts_with(w), "{w}");
        }
    }
}
