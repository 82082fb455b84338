//! Fixed-length baseline: a set number of queries, then a guess.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::env::Action;
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct StaticConfig {
    pub n_queries: u32,
}

impl Default for StaticConfig {
    fn default() -> Self {
        Self { n_queries: 15 }
    }
}

/// Position in `beam` of the static policy's action. Even turns prefer label
/// queries and odd turns example queries; each falls back to the other type,
/// then to `Guess`.
pub fn static_policy_act(turn: u32, beam: &[Action], config: &StaticConfig, rng: &mut StreamRng) -> usize {
    let guess = beam.iter().position(|a| *a == Action::Guess).unwrap_or(0);
    if turn >= config.n_queries {
        return guess;
    }
    let of_type = |label: bool| -> Vec<usize> {
        beam.iter()
            .enumerate()
            .filter(|(_, a)| match a {
                Action::LabelQuery { .. } => label,
                Action::ExampleQuery { .. } => !label,
                Action::Guess => false,
            })
            .map(|(i, _)| i)
            .collect()
    };
    let prefer_label = turn % 2 == 0;
    let first = of_type(prefer_label);
    let pool = if first.is_empty() { of_type(!prefer_label) } else { first };
    pool.choose(rng).copied().unwrap_or(guess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{PredicateId, RegionIdx};
    use alloc::vec;

    fn beam() -> Vec<Action> {
        vec![
            Action::Guess,
            Action::LabelQuery { predicate: PredicateId(0), region: RegionIdx(1) },
            Action::ExampleQuery { predicate: PredicateId(2) },
        ]
    }

    #[test]
    fn schedule() {
        let mut rng = crate::rng::stream(1, &[]);
        let cfg = StaticConfig::default();
        assert_eq!(static_policy_act(0, &beam(), &cfg, &mut rng), 1);
        assert_eq!(static_policy_act(1, &beam(), &cfg, &mut rng), 2);
        assert_eq!(static_policy_act(15, &beam(), &cfg, &mut rng), 0);
        assert_eq!(static_policy_act(3, &[Action::Guess], &cfg, &mut rng), 0);
        assert_eq!(static_policy_act(2, &beam()[..1].iter().chain(&beam()[2..]).copied().collect::<Vec<_>>(), &cfg, &mut rng), 1);
    }
}
