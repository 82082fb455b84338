//! Cross-dialog agent state: predicate models, the seen-predicate set and
//! usage statistics.

use alloc::collections::{BTreeMap, BTreeSet};

use crate::corpus::{Corpus, PredicateId, RegionIdx};
use crate::perception::{Label, PredicateModel, TrainConfig};

/// Read access to predicate models, possibly layered over a frozen snapshot.
pub trait ModelView {
    fn model(&self, predicate: PredicateId) -> Option<&PredicateModel>;

    fn f1(&self, predicate: PredicateId) -> f64 {
        self.model(predicate).map_or(0.0, |m| m.f1)
    }

    fn has_classifier(&self, predicate: PredicateId) -> bool {
        self.model(predicate).is_some_and(|m| m.classifier.is_some())
    }

    fn decide(&self, predicate: PredicateId, x: &[f64]) -> Label {
        self.model(predicate).map_or(Label::Negative, |m| m.decide(x))
    }

    fn is_labeled(&self, predicate: PredicateId, region: RegionIdx) -> bool {
        self.model(predicate).is_some_and(|m| m.has_label(region))
    }
}

impl ModelView for BTreeMap<PredicateId, PredicateModel> {
    fn model(&self, predicate: PredicateId) -> Option<&PredicateModel> {
        self.get(&predicate)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PredicateUsage {
    /// Dialogs whose description used the predicate.
    pub used: u64,
    /// Of those, dialogs ending in a correct guess.
    pub succeeded: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgentStats {
    pub usage: BTreeMap<PredicateId, PredicateUsage>,
    pub dialogs: u64,
}

impl AgentStats {
    pub fn record_dialog(&mut self, description: &[PredicateId], success: bool) {
        self.dialogs += 1;
        for &p in description {
            let u = self.usage.entry(p).or_default();
            u.used += 1;
            u.succeeded += u64::from(success);
        }
    }

    /// Share of past dialogs whose description used `p`.
    pub fn usage_frequency(&self, p: PredicateId) -> f64 {
        if self.dialogs == 0 {
            return 0.0;
        }
        self.usage.get(&p).map_or(0.0, |u| u.used as f64 / self.dialogs as f64)
    }

    /// Success rate among past dialogs that used `p`; zero if never used.
    pub fn success_rate(&self, p: PredicateId) -> f64 {
        match self.usage.get(&p) {
            Some(u) if u.used > 0 => u.succeeded as f64 / u.used as f64,
            _ => 0.0,
        }
    }
}

/// Everything the agent carries from one dialog to the next, except the
/// policy weights.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgentState {
    pub models: BTreeMap<PredicateId, PredicateModel>,
    /// Every predicate seen in a description so far.
    pub predicates: BTreeSet<PredicateId>,
    pub stats: AgentStats,
}

impl ModelView for AgentState {
    fn model(&self, predicate: PredicateId) -> Option<&PredicateModel> {
        self.models.get(&predicate)
    }
}

impl AgentState {
    /// Forgets every classifier, label, seen predicate and statistic.
    pub fn reset_perception(&mut self) {
        *self = AgentState::default();
    }

    pub fn register(&mut self, description: &[PredicateId]) {
        self.predicates.extend(description.iter().copied());
    }

    /// Merges labels and refits every predicate whose label set changed.
    /// Returns the conflicting `(predicate, region)` if the oracle ever
    /// contradicted itself.
    pub fn apply_labels<I>(
        &mut self,
        labels: I,
        corpus: &Corpus,
        train: &TrainConfig,
        folds: usize,
    ) -> Result<usize, (PredicateId, RegionIdx)>
    where
        I: IntoIterator<Item = (PredicateId, RegionIdx, Label)>,
    {
        let mut touched = BTreeSet::new();
        for (p, r, y) in labels {
            match self.models.entry(p).or_default().add_label(r, y) {
                Ok(true) => {
                    touched.insert(p);
                }
                Ok(false) => {}
                Err(_) => return Err((p, r)),
            }
        }
        for p in &touched {
            if let Some(m) = self.models.get_mut(p) {
                m.refresh(corpus, train, folds);
            }
        }
        Ok(touched.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_statistics() {
        let mut s = AgentStats::default();
        let a = PredicateId(0);
        let b = PredicateId(1);
        s.record_dialog(&[a], true);
        s.record_dialog(&[a, b], false);
        s.record_dialog(&[b], false);
        assert_eq!(s.dialogs, 3);
        assert!((s.usage_frequency(a) - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.success_rate(a) - 0.5).abs() < 1e-12);
        assert_eq!(s.success_rate(PredicateId(9)), 0.0);
        for u in s.usage.values() {
            assert!(u.succeeded <= u.used && u.used <= s.dialogs);
        }
    }
}
