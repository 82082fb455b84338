//! Candidate beams: which queries the policy gets to choose among each turn.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::agent::ModelView;
use crate::corpus::{Corpus, PredicateId, RegionIdx};
use crate::env::{Action, Episode};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Piecewise-linear predicate weight: `w_min` at F1 0 and 1, `w_max` at `c_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TriangularWeights {
    pub w_min: f64,
    pub w_max: f64,
    pub c_max: f64,
}

impl Default for TriangularWeights {
    fn default() -> Self {
        Self { w_min: 0.1, w_max: 1.0, c_max: 0.6 }
    }
}

impl TriangularWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.w_min > 0.0 && self.w_min < self.w_max && self.w_max.is_finite()) {
            return Err(Error::Config("triangular weights need 0 < w_min < w_max".into()));
        }
        if !(self.c_max > 0.0 && self.c_max < 1.0) {
            return Err(Error::Config("triangular peak c_max must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn weight(&self, c: f64) -> f64 {
        predicate_weight(c, self)
    }
}

pub fn predicate_weight(c: f64, params: &TriangularWeights) -> f64 {
    let t = if c <= params.c_max {
        c / params.c_max
    } else {
        (1.0 - c) / (1.0 - params.c_max)
    };
    // Interpolating this way keeps both endpoints exact.
    params.w_min * (1.0 - t) + params.w_max * t
}

/// Draws up to `count` distinct predicates, each draw proportional to its
/// triangular weight among those not yet drawn.
pub fn sample_predicates(
    candidates: &[PredicateId],
    f1: impl Fn(PredicateId) -> f64,
    count: usize,
    params: &TriangularWeights,
    rng: &mut StreamRng,
) -> Vec<PredicateId> {
    if candidates.len() <= count {
        return candidates.to_vec();
    }
    let mut pool: Vec<(PredicateId, f64)> = candidates.iter().map(|&p| (p, params.weight(f1(p)))).collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let total: f64 = pool.iter().map(|(_, w)| w).sum();
        let mut u = rng.gen::<f64>() * total;
        let mut pick = pool.len() - 1;
        for (i, (_, w)) in pool.iter().enumerate() {
            if u < *w {
                pick = i;
                break;
            }
            u -= w;
        }
        out.push(pool.remove(pick).0);
    }
    out
}

/// Uncertainty sampling over the unlabeled active-train regions: the region
/// nearest the predicate's hyperplane, or a uniform pick when the predicate
/// has no classifier yet.
pub fn best_object_for_predicate(
    predicate: PredicateId,
    models: &(impl ModelView + ?Sized),
    active_train: &[RegionIdx],
    is_labeled: impl Fn(RegionIdx) -> bool,
    corpus: &Corpus,
    rng: &mut StreamRng,
) -> Result<RegionIdx> {
    let mut unlabeled: Vec<RegionIdx> = active_train.iter().copied().filter(|&r| !is_labeled(r)).collect();
    if unlabeled.is_empty() {
        return Err(Error::Exhausted(corpus.predicate_name(predicate).into()));
    }
    unlabeled.sort_unstable();
    match models.model(predicate).and_then(|m| m.classifier.as_ref()) {
        Some(classifier) => Ok(unlabeled
            .iter()
            .map(|&r| (classifier.margin(corpus.features(r)), r))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, r)| r)
            .expect("non-empty")),
        None => Ok(*unlabeled.choose(rng).expect("non-empty")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct BeamConfig {
    pub n_label: usize,
    pub n_example: usize,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self { n_label: 3, n_example: 3 }
    }
}

/// Candidate actions for the current turn. `Guess` always comes first and is
/// the only candidate once the turn cap is reached.
pub fn build_beam(
    episode: &Episode<'_>,
    config: &BeamConfig,
    params: &TriangularWeights,
    rng: &mut StreamRng,
) -> Vec<Action> {
    let mut beam = alloc::vec![Action::Guess];
    if episode.at_turn_cap() {
        return beam;
    }
    let corpus = episode.corpus();
    let active_train = &episode.state().interaction.active_train;
    let predicates = episode.predicates();

    let labelable: Vec<PredicateId> = predicates
        .iter()
        .copied()
        .filter(|&p| active_train.iter().any(|&r| !episode.is_pair_labeled(p, r)))
        .collect();
    for p in sample_predicates(&labelable, |p| episode.f1(p), config.n_label, params, rng) {
        if let Ok(region) =
            best_object_for_predicate(p, episode, active_train, |r| episode.is_pair_labeled(p, r), corpus, rng)
        {
            beam.push(Action::LabelQuery { predicate: p, region });
        }
    }

    let askable: Vec<PredicateId> = predicates
        .iter()
        .copied()
        .filter(|p| !episode.state().asked_examples.contains(p))
        .collect();
    for p in sample_predicates(&askable, |p| episode.f1(p), config.n_example, params, rng) {
        beam.push(Action::ExampleQuery { predicate: p });
    }
    beam
}
