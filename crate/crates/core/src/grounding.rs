//! Retrieval: score active-test regions by F1-weighted classifier decisions.

use alloc::vec::Vec;

use crate::agent::ModelView;
use crate::corpus::{Corpus, PredicateId, RegionIdx};
use crate::perception::Label;

/// Scores of every active-test region for one description.
#[derive(Debug, Clone, PartialEq)]
pub struct GuessScores {
    pub regions: Vec<RegionIdx>,
    /// `C(p)` per description predicate.
    pub confidences: Vec<f64>,
    /// `decisions[i][j]`: decision of predicate `i` on region `j`.
    pub decisions: Vec<Vec<Label>>,
    /// Sum over predicates of `d(p, o) * C(p)`.
    pub weighted: Vec<f64>,
    /// Sum over predicates of `d(p, o)`.
    pub unweighted: Vec<f64>,
    /// Region positions sorted by weighted score (descending), ties by
    /// ascending region index.
    pub ranking: Vec<usize>,
}

impl GuessScores {
    pub fn from_decisions(regions: &[RegionIdx], confidences: &[f64], decisions: Vec<Vec<Label>>) -> Self {
        debug_assert_eq!(confidences.len(), decisions.len());
        let n = regions.len();
        let mut weighted = alloc::vec![0.0; n];
        let mut unweighted = alloc::vec![0.0; n];
        for (row, &c) in decisions.iter().zip(confidences) {
            for (j, d) in row.iter().enumerate() {
                weighted[j] += d.sign() * c;
                unweighted[j] += d.sign();
            }
        }
        let mut ranking: Vec<usize> = (0..n).collect();
        ranking.sort_by(|&a, &b| weighted[b].total_cmp(&weighted[a]).then(regions[a].cmp(&regions[b])));
        Self {
            regions: regions.to_vec(),
            confidences: confidences.to_vec(),
            decisions,
            weighted,
            unweighted,
            ranking,
        }
    }

    /// Position of the best guess in `regions`.
    pub fn top(&self) -> usize {
        self.ranking[0]
    }

    pub fn best(&self) -> RegionIdx {
        self.regions[self.top()]
    }
}

pub fn score_objects(
    description: &[PredicateId],
    models: &(impl ModelView + ?Sized),
    active_test: &[RegionIdx],
    corpus: &Corpus,
) -> GuessScores {
    debug_assert!(!description.is_empty() && !active_test.is_empty());
    let confidences: Vec<f64> = description.iter().map(|&p| models.f1(p)).collect();
    let decisions = description
        .iter()
        .map(|&p| active_test.iter().map(|&r| models.decide(p, corpus.features(r))).collect())
        .collect();
    GuessScores::from_decisions(active_test, &confidences, decisions)
}

pub fn best_guess(scores: &GuessScores) -> RegionIdx {
    scores.best()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use Label::{Negative as N, Positive as P};

    #[test]
    fn worked_instance() {
        let regions = [RegionIdx(1), RegionIdx(2), RegionIdx(3)];
        let s = GuessScores::from_decisions(&regions, &[0.9, 0.4], vec![vec![P, N, P], vec![N, P, P]]);
        let expect = [0.5, -0.5, 1.3];
        for (got, want) in s.weighted.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(best_guess(&s), RegionIdx(3));
        assert_eq!(s.ranking, [2, 0, 1]);
    }

    #[test]
    fn zero_confidence_ties_go_to_lowest_id() {
        let regions = [RegionIdx(7), RegionIdx(2), RegionIdx(5)];
        let s = GuessScores::from_decisions(&regions, &[0.0, 0.0], vec![vec![N, N, N], vec![N, N, N]]);
        assert!(s.weighted.iter().all(|&w| w == 0.0));
        assert_eq!(s.best(), RegionIdx(2));
    }

    #[test]
    fn single_candidate() {
        let s = GuessScores::from_decisions(&[RegionIdx(4)], &[0.3], vec![vec![N]]);
        assert_eq!(s.best(), RegionIdx(4));
    }

    #[test]
    fn negated_scores_move_a_strict_argmax() {
        let regions = [RegionIdx(1), RegionIdx(2), RegionIdx(3)];
        let s = GuessScores::from_decisions(&regions, &[0.9, 0.4], vec![vec![P, N, P], vec![N, P, P]]);
        let flip = |row: &Vec<Label>| row.iter().map(|&d| if d == P { N } else { P }).collect();
        let neg = GuessScores::from_decisions(&regions, &[0.9, 0.4], s.decisions.iter().map(flip).collect());
        assert_ne!(neg.best(), s.best());
    }
}
