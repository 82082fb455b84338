use alloc::collections::BTreeMap;

use super::{estimate_f1, train_linear, LinearModel, TrainConfig};
use crate::corpus::{Corpus, RegionIdx};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

/// A second, different label for an already-labeled region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelConflict {
    pub region: RegionIdx,
    pub existing: Label,
}

/// Everything the agent knows about one predicate.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PredicateModel {
    pub labels: BTreeMap<RegionIdx, Label>,
    pub classifier: Option<LinearModel>,
    pub f1: f64,
}

impl PredicateModel {
    /// Records a label. Returns whether it was new; relabeling with the same
    /// value is a no-op.
    pub fn add_label(&mut self, region: RegionIdx, label: Label) -> Result<bool, LabelConflict> {
        match self.labels.get(&region) {
            Some(&existing) if existing == label => Ok(false),
            Some(&existing) => Err(LabelConflict { region, existing }),
            None => {
                self.labels.insert(region, label);
                Ok(true)
            }
        }
    }

    pub fn has_label(&self, region: RegionIdx) -> bool {
        self.labels.contains_key(&region)
    }

    pub fn positives(&self) -> usize {
        self.labels.values().filter(|&&l| l == Label::Positive).count()
    }

    pub fn negatives(&self) -> usize {
        self.labels.len() - self.positives()
    }

    pub fn is_trainable(&self) -> bool {
        self.positives() > 0 && self.negatives() > 0
    }

    /// Refits the classifier from scratch on the current labels.
    pub fn train(&mut self, corpus: &Corpus, config: &TrainConfig) {
        self.classifier = train_linear(
            self.labels.iter().map(|(&r, &y)| (corpus.features(r), y)),
            corpus.dim(),
            config,
        );
        if self.classifier.is_none() {
            self.f1 = 0.0;
        }
    }

    /// Refits the classifier and re-estimates its F1.
    pub fn refresh(&mut self, corpus: &Corpus, config: &TrainConfig, folds: usize) {
        self.train(corpus, config);
        self.f1 = if self.classifier.is_some() {
            estimate_f1(&self.labels, corpus, config, folds)
        } else {
            0.0
        };
    }

    /// Classifier decision, negative when no classifier exists.
    pub fn decide(&self, x: &[f64]) -> Label {
        self.classifier.as_ref().map_or(Label::Negative, |c| c.decide(x))
    }

    pub fn margin(&self, x: &[f64]) -> Option<f64> {
        self.classifier.as_ref().map(|c| c.margin(x))
    }
}
