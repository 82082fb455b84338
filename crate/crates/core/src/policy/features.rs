//! State-action features. Indices are stable: ablation configs and logged
//! transcripts refer to them by position and name.

use alloc::vec::Vec;
use core::fmt;

use crate::agent::ModelView;
use crate::corpus::PredicateId;
use crate::env::{Action, Episode};
use crate::error::{Error, Result};
use crate::grounding::{score_objects, GuessScores};
use crate::perception::DensityIndex;

pub const NUM_FEATURES: usize = 28;

/// Which action types a feature is defined for; it is exactly 0 elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Applies {
    All,
    Guess,
    Query,
    Label,
}

impl Applies {
    pub fn matches(self, action: &Action) -> bool {
        match self {
            Applies::All => true,
            Applies::Guess => matches!(action, Action::Guess),
            Applies::Query => action.is_query(),
            Applies::Label => matches!(action, Action::LabelQuery { .. }),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Applies::All => "all",
            Applies::Guess => "guess",
            Applies::Query => "label,example",
            Applies::Label => "label",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureSpec {
    pub index: usize,
    pub name: &'static str,
    pub applies: Applies,
    pub normalization: &'static str,
    pub range: (f64, f64),
}

const fn spec(
    index: usize,
    name: &'static str,
    applies: Applies,
    normalization: &'static str,
    range: (f64, f64),
) -> FeatureSpec {
    FeatureSpec { index, name, applies, normalization, range }
}

const UNIT: (f64, f64) = (0.0, 1.0);
const SIGNED: (f64, f64) = (-1.0, 1.0);
const GAP: (f64, f64) = (0.0, 2.0);

pub const REGISTRY: [FeatureSpec; NUM_FEATURES] = [
    spec(0, "turn", Applies::All, "turn / t_max", UNIT),
    spec(1, "is_guess", Applies::All, "indicator", UNIT),
    spec(2, "is_label_query", Applies::All, "indicator", UNIT),
    spec(3, "is_example_query", Applies::All, "indicator", UNIT),
    spec(4, "f1_min", Applies::Guess, "raw", UNIT),
    spec(5, "f1_max", Applies::Guess, "raw", UNIT),
    spec(6, "f1_second", Applies::Guess, "raw; 0 with one predicate", UNIT),
    spec(7, "f1_mean", Applies::Guess, "raw", UNIT),
    spec(8, "score_top", Applies::Guess, "weighted score / k", SIGNED),
    spec(9, "score_top_minus_second", Applies::Guess, "weighted score gap / k", GAP),
    spec(10, "score_top_minus_mean", Applies::Guess, "weighted score gap / k", GAP),
    spec(11, "votes_top", Applies::Guess, "decision sum / k", SIGNED),
    spec(12, "votes_top_minus_second", Applies::Guess, "decision sum gap / k", GAP),
    spec(13, "votes_top_minus_mean", Applies::Guess, "decision sum gap / k", GAP),
    spec(14, "best_two_agree_on_top", Applies::Guess, "indicator; 0 with one predicate", UNIT),
    spec(15, "best_decision_on_top", Applies::Guess, "decision in {-1, 1}", SIGNED),
    spec(16, "second_decision_on_top", Applies::Guess, "decision in {-1, 1}; 0 with one predicate", SIGNED),
    spec(17, "best_decision_minus_mean", Applies::Guess, "(decision - mean decision) / 2", SIGNED),
    spec(18, "second_decision_minus_mean", Applies::Guess, "(decision - mean decision) / 2", SIGNED),
    spec(19, "best_same_on_top_two", Applies::Guess, "indicator", UNIT),
    spec(20, "new_predicate", Applies::Query, "indicator: no classifier yet", UNIT),
    spec(21, "predicate_f1", Applies::Query, "raw", UNIT),
    spec(22, "usage_frequency", Applies::Query, "dialogs using predicate / dialogs", UNIT),
    spec(23, "usage_success", Applies::Query, "success rate when used; 0 if unused", UNIT),
    spec(24, "opportunistic", Applies::Query, "indicator: predicate not in description", UNIT),
    spec(25, "margin", Applies::Label, "m / (1 + m); 0 without classifier", UNIT),
    spec(26, "avg_cosine_distance", Applies::Label, "distance / 2", UNIT),
    spec(27, "knn_unlabeled", Applies::Label, "fraction", UNIT),
];

/// Named index groups usable in ablation configs.
pub const GROUPS: [(&str, core::ops::Range<usize>); 2] = [("guess", 4..20), ("query", 20..28)];

pub fn feature_index(name: &str) -> Option<usize> {
    REGISTRY.iter().position(|s| s.name == name)
}

#[derive(Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl Default for FeatureVector {
    fn default() -> Self {
        Self([0.0; NUM_FEATURES])
    }
}

impl fmt::Debug for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl FeatureVector {
    pub fn dot(&self, theta: &[f64]) -> f64 {
        self.0.iter().zip(theta).map(|(a, b)| a * b).sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Indices forced to zero in every feature vector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FeatureMask {
    masked: [bool; NUM_FEATURES],
}

impl FeatureMask {
    pub fn none() -> Self {
        Self::default()
    }

    /// Resolves feature and group names.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut mask = Self::default();
        for name in names {
            let name = name.as_ref();
            if let Some((_, range)) = GROUPS.iter().find(|(g, _)| *g == name) {
                for i in range.clone() {
                    mask.masked[i] = true;
                }
            } else if let Some(i) = feature_index(name) {
                mask.masked[i] = true;
            } else {
                return Err(Error::Config(alloc::format!("unknown feature or group `{name}`")));
            }
        }
        Ok(mask)
    }

    pub fn is_masked(&self, index: usize) -> bool {
        self.masked[index]
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..NUM_FEATURES).filter(|&i| self.masked[i])
    }

    pub fn apply(&self, v: &mut FeatureVector) {
        for (x, &m) in v.0.iter_mut().zip(&self.masked) {
            if m {
                *x = 0.0;
            }
        }
    }
}

/// Guess-action features; identical for every beam entry of one turn.
fn guess_block(scores: &GuessScores, out: &mut [f64; NUM_FEATURES]) {
    let k = scores.confidences.len() as f64;
    let n = scores.regions.len();

    // Description predicates by estimated F1, descending; ties keep order.
    let mut by_f1: Vec<usize> = (0..scores.confidences.len()).collect();
    by_f1.sort_by(|&a, &b| scores.confidences[b].total_cmp(&scores.confidences[a]));
    let best = by_f1[0];
    let second = by_f1.get(1).copied();

    let c = &scores.confidences;
    out[4] = c.iter().copied().fold(f64::INFINITY, f64::min);
    out[5] = c[best];
    out[6] = second.map_or(0.0, |s| c[s]);
    out[7] = c.iter().sum::<f64>() / k;

    let summarize = |values: &[f64]| -> (f64, f64, f64) {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let top = sorted[0];
        let second = sorted.get(1).copied().unwrap_or(top);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        (top, top - second, top - mean)
    };
    let (top, gap2, gapm) = summarize(&scores.weighted);
    out[8] = top / k;
    out[9] = gap2 / k;
    out[10] = gapm / k;
    let (top, gap2, gapm) = summarize(&scores.unweighted);
    out[11] = top / k;
    out[12] = gap2 / k;
    out[13] = gapm / k;

    let top_pos = scores.ranking[0];
    let runner_up = scores.ranking.get(1).copied();
    let decision = |i: usize, j: usize| scores.decisions[i][j].sign();
    let mean_decision = |i: usize| scores.decisions[i].iter().map(|d| d.sign()).sum::<f64>() / n as f64;

    out[15] = decision(best, top_pos);
    out[17] = (decision(best, top_pos) - mean_decision(best)) / 2.0;
    if let Some(s) = second {
        out[14] = f64::from(u8::from(scores.decisions[best][top_pos] == scores.decisions[s][top_pos]));
        out[16] = decision(s, top_pos);
        out[18] = (decision(s, top_pos) - mean_decision(s)) / 2.0;
    }
    if let Some(r) = runner_up {
        out[19] = f64::from(u8::from(scores.decisions[best][top_pos] == scores.decisions[best][r]));
    }
}

fn query_block(episode: &Episode<'_>, predicate: PredicateId, out: &mut [f64; NUM_FEATURES]) {
    let stats = &episode.agent().stats;
    out[20] = f64::from(u8::from(!episode.has_classifier(predicate)));
    out[21] = episode.f1(predicate);
    out[22] = stats.usage_frequency(predicate);
    out[23] = stats.success_rate(predicate);
    out[24] = f64::from(u8::from(!episode.state().interaction.description.contains(&predicate)));
}

/// Per-turn featurizer: scores the description once, then fills one vector
/// per candidate.
pub struct TurnFeatures<'e, 'a> {
    episode: &'e Episode<'a>,
    density: &'e DensityIndex,
    guess: [f64; NUM_FEATURES],
}

impl<'e, 'a> TurnFeatures<'e, 'a> {
    pub fn new(episode: &'e Episode<'a>, density: &'e DensityIndex) -> Self {
        let interaction = &episode.state().interaction;
        let scores = score_objects(&interaction.description, episode, &interaction.active_test, episode.corpus());
        let mut guess = [0.0; NUM_FEATURES];
        guess_block(&scores, &mut guess);
        Self { episode, density, guess }
    }

    pub fn featurize(&self, action: &Action) -> Result<FeatureVector> {
        let ep = self.episode;
        let mut f = [0.0; NUM_FEATURES];
        f[0] = f64::from(ep.state().turn) / f64::from(ep.config().t_max.max(1));
        match *action {
            Action::Guess => {
                f[4..20].copy_from_slice(&self.guess[4..20]);
                f[1] = 1.0;
            }
            Action::ExampleQuery { predicate } => {
                f[3] = 1.0;
                query_block(ep, predicate, &mut f);
            }
            Action::LabelQuery { predicate, region } => {
                f[2] = 1.0;
                query_block(ep, predicate, &mut f);
                let corpus = ep.corpus();
                if let Some(m) = ep.model(predicate).and_then(|m| m.margin(corpus.features(region))) {
                    f[25] = m / (1.0 + m);
                }
                let density = self.density.stats_with(region, |r| ep.is_pair_labeled(predicate, r))?;
                f[26] = density.avg_cosine_distance / 2.0;
                f[27] = density.knn_unlabeled_fraction;
            }
        }
        Ok(FeatureVector(f))
    }

    pub fn featurize_beam(&self, beam: &[Action], mask: &FeatureMask) -> Result<Vec<FeatureVector>> {
        beam.iter()
            .map(|a| {
                let mut v = self.featurize(a)?;
                mask.apply(&mut v);
                Ok(v)
            })
            .collect()
    }
}

/// Features of one state-action pair.
pub fn featurize(episode: &Episode<'_>, action: &Action, density: &DensityIndex) -> Result<FeatureVector> {
    TurnFeatures::new(episode, density).featurize(action)
}

/// Guess-block features of precomputed grounding scores, for inspection.
pub fn guess_features(scores: &GuessScores) -> FeatureVector {
    let mut f = [0.0; NUM_FEATURES];
    guess_block(scores, &mut f);
    f[1] = 1.0;
    FeatureVector(f)
}
