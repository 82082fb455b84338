use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{train_linear, Label, TrainConfig};
use crate::corpus::{Corpus, RegionIdx};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

/// F1 of the positive class; zero when precision + recall is zero.
pub fn f1_score(c: Confusion) -> f64 {
    let denom = 2 * c.tp + c.fp + c.fn_;
    if c.tp == 0 || denom == 0 {
        0.0
    } else {
        2.0 * c.tp as f64 / denom as f64
    }
}

/// Fold index for every labeled region: positives and negatives are each
/// dealt round-robin in region order, so the assignment depends on the label
/// set only.
pub fn stratified_folds(labels: &BTreeMap<RegionIdx, Label>, folds: usize) -> BTreeMap<RegionIdx, usize> {
    let mut out = BTreeMap::new();
    for class in [Label::Positive, Label::Negative] {
        for (rank, (&r, _)) in labels.iter().filter(|(_, &l)| l == class).enumerate() {
            out.insert(r, rank % folds);
        }
    }
    out
}

/// Stratified k-fold estimate of the classifier's F1 on its own labels.
///
/// Fewer than four labels, or a single class, estimates to zero. The fold
/// count is capped by the size of the smaller class.
pub fn estimate_f1(
    labels: &BTreeMap<RegionIdx, Label>,
    corpus: &Corpus,
    config: &TrainConfig,
    folds: usize,
) -> f64 {
    let pos = labels.values().filter(|&&l| l == Label::Positive).count();
    let neg = labels.len() - pos;
    if labels.len() < 4 || pos == 0 || neg == 0 {
        return 0.0;
    }
    let k = folds.min(pos).min(neg).max(1);
    let assignment = stratified_folds(labels, k);

    let mut confusion = Confusion::default();
    let mut held_out: Vec<(RegionIdx, Label)> = Vec::new();
    for fold in 0..k {
        held_out.clear();
        let train = labels.iter().filter_map(|(&r, &y)| {
            if assignment[&r] == fold {
                held_out.push((r, y));
                None
            } else {
                Some((corpus.features(r), y))
            }
        });
        let model = train_linear(train.collect::<Vec<_>>(), corpus.dim(), config);
        for &(r, y) in &held_out {
            let predicted = model.as_ref().map_or(Label::Negative, |m| m.decide(corpus.features(r)));
            match (predicted, y) {
                (Label::Positive, Label::Positive) => confusion.tp += 1,
                (Label::Positive, Label::Negative) => confusion.fp += 1,
                (Label::Negative, Label::Positive) => confusion.fn_ += 1,
                (Label::Negative, Label::Negative) => {}
            }
        }
    }
    f1_score(confusion)
}
