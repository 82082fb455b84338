//! The dialog MDP: one interaction per episode, a simulated oracle answering
//! from annotations, rewards, and termination by guessing.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::agent::{AgentState, ModelView};
use crate::corpus::{Corpus, Interaction, PredicateId, RegionIdx};
use crate::error::{Error, Result};
use crate::grounding::score_objects;
use crate::perception::{Label, PredicateModel, TrainConfig};
use crate::policy::FeatureVector;
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum Action {
    Guess,
    /// "Does `predicate` apply to `region`?"
    LabelQuery { predicate: PredicateId, region: RegionIdx },
    /// "Show me a `predicate` region."
    ExampleQuery { predicate: PredicateId },
}

impl Action {
    pub fn is_query(&self) -> bool {
        !matches!(self, Action::Guess)
    }

    pub fn predicate(&self) -> Option<PredicateId> {
        match *self {
            Action::Guess => None,
            Action::LabelQuery { predicate, .. } | Action::ExampleQuery { predicate } => Some(predicate),
        }
    }

    /// Human-readable descriptor, e.g. `label(red, 17)`.
    pub fn describe(&self, corpus: &Corpus) -> String {
        match *self {
            Action::Guess => "guess".into(),
            Action::LabelQuery { predicate, region } => {
                format!("label({}, {})", corpus.predicate_name(predicate), corpus.region(region).id)
            }
            Action::ExampleQuery { predicate } => format!("example({})", corpus.predicate_name(predicate)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RewardConfig {
    pub correct_guess: f64,
    pub incorrect_guess: f64,
    pub per_query: f64,
    pub gamma: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self { correct_guess: 200.0, incorrect_guess: -100.0, per_query: -1.0, gamma: 1.0 }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.correct_guess, self.incorrect_guess, self.per_query, self.gamma]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("rewards must be finite".into()));
        }
        if !(self.correct_guess > 0.0 && 0.0 > self.per_query) {
            return Err(Error::Config("rewards need correct_guess > 0 > per_query".into()));
        }
        if self.incorrect_guess >= self.per_query {
            return Err(Error::Config("rewards need incorrect_guess < per_query".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config("gamma must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// When labels acquired in a dialog reach the classifiers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum UpdateMode {
    /// Classifiers are frozen for the whole batch and refit at its end.
    #[default]
    BatchEnd,
    /// The dialog's own copy of a classifier is refit after every answer.
    Immediate,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EnvConfig {
    /// Turn cap; at this turn only `Guess` is admissible.
    pub t_max: u32,
    pub rewards: RewardConfig,
    pub update_mode: UpdateMode,
    pub classifier: TrainConfig,
    pub f1_folds: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            t_max: 40,
            rewards: RewardConfig::default(),
            update_mode: UpdateMode::BatchEnd,
            classifier: TrainConfig::default(),
            f1_folds: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PendingLabel {
    pub predicate: PredicateId,
    pub region: RegionIdx,
    pub label: Label,
}

/// One transcript entry: the candidate beam's features, the chosen action and
/// its reward.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TranscriptEntry {
    pub turn: u32,
    pub beam: Vec<FeatureVector>,
    pub chosen: usize,
    pub action: Action,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeState {
    pub interaction: Interaction,
    pub turn: u32,
    /// Every label the oracle handed out in this dialog, in order.
    pub pending_labels: Vec<PendingLabel>,
    pub transcript: Vec<TranscriptEntry>,
    pub terminated: bool,
    pub asked_examples: BTreeSet<PredicateId>,
    pub guess: Option<RegionIdx>,
}

impl EpisodeState {
    pub fn success(&self) -> Option<bool> {
        self.guess.map(|g| g == self.interaction.target)
    }

    pub fn queries(&self) -> u32 {
        self.transcript.iter().filter(|e| e.action.is_query()).count() as u32
    }
}

/// What a step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub reward: f64,
    pub terminated: bool,
    /// Answer to an example query; `None` means no active-train region applies.
    pub example: Option<Option<RegionIdx>>,
}

/// A running dialog over a frozen agent snapshot.
pub struct Episode<'a> {
    corpus: &'a Corpus,
    agent: &'a AgentState,
    config: &'a EnvConfig,
    state: EpisodeState,
    predicates: Vec<PredicateId>,
    labeled: BTreeSet<(PredicateId, RegionIdx)>,
    overlay: BTreeMap<PredicateId, PredicateModel>,
    rng: StreamRng,
}

impl ModelView for Episode<'_> {
    fn model(&self, predicate: PredicateId) -> Option<&PredicateModel> {
        self.overlay.get(&predicate).or_else(|| self.agent.models.get(&predicate))
    }
}

impl<'a> Episode<'a> {
    /// Starts a dialog. The description's predicates join the episode's view
    /// of the seen-predicate set.
    pub fn start(
        corpus: &'a Corpus,
        agent: &'a AgentState,
        config: &'a EnvConfig,
        interaction: Interaction,
        rng: StreamRng,
    ) -> Result<Self> {
        if interaction.description.is_empty() {
            return Err(Error::Episode("interaction has no description predicates".into()));
        }
        if !interaction.active_test.contains(&interaction.target) {
            return Err(Error::Episode("target is not in the active test set".into()));
        }
        if interaction.active_train.iter().any(|r| interaction.active_test.contains(r)) {
            return Err(Error::Episode("active train and test sets overlap".into()));
        }
        let mut predicates: BTreeSet<PredicateId> = agent.predicates.clone();
        predicates.extend(interaction.description.iter().copied());
        Ok(Self {
            corpus,
            agent,
            config,
            state: EpisodeState {
                interaction,
                turn: 0,
                pending_labels: Vec::new(),
                transcript: Vec::new(),
                terminated: false,
                asked_examples: BTreeSet::new(),
                guess: None,
            },
            predicates: predicates.into_iter().collect(),
            labeled: BTreeSet::new(),
            overlay: BTreeMap::new(),
            rng,
        })
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    pub fn agent(&self) -> &'a AgentState {
        self.agent
    }

    pub fn config(&self) -> &'a EnvConfig {
        self.config
    }

    pub fn state(&self) -> &EpisodeState {
        &self.state
    }

    pub fn into_state(self) -> EpisodeState {
        self.state
    }

    /// Seen predicates, sorted.
    pub fn predicates(&self) -> &[PredicateId] {
        &self.predicates
    }

    pub fn at_turn_cap(&self) -> bool {
        self.state.turn >= self.config.t_max
    }

    /// Labeled in the snapshot or earlier in this dialog.
    pub fn is_pair_labeled(&self, predicate: PredicateId, region: RegionIdx) -> bool {
        self.labeled.contains(&(predicate, region)) || self.agent.is_labeled(predicate, region)
    }

    fn require_live(&self) -> Result<()> {
        if self.state.terminated {
            return Err(Error::Protocol("the episode has already terminated".into()));
        }
        Ok(())
    }

    fn record_label(&mut self, predicate: PredicateId, region: RegionIdx, label: Label) -> Result<()> {
        self.state.pending_labels.push(PendingLabel { predicate, region, label });
        self.labeled.insert((predicate, region));
        if self.config.update_mode == UpdateMode::Immediate {
            let model = self
                .overlay
                .entry(predicate)
                .or_insert_with(|| self.agent.models.get(&predicate).cloned().unwrap_or_default());
            model.add_label(region, label).map_err(|_| Error::LabelConflict {
                predicate: self.corpus.predicate_name(predicate).into(),
                region: self.corpus.region(region).id,
            })?;
        }
        Ok(())
    }

    fn refresh_overlay(&mut self, predicate: PredicateId) {
        if let Some(model) = self.overlay.get_mut(&predicate) {
            model.refresh(self.corpus, &self.config.classifier, self.config.f1_folds);
        }
    }

    /// Closed-world answer: positive iff the predicate is annotated on the region.
    pub fn answer_label_query(&mut self, predicate: PredicateId, region: RegionIdx) -> Result<Label> {
        self.require_live()?;
        if !self.state.interaction.active_train.contains(&region) {
            return Err(Error::Protocol(format!(
                "region {} is not in the active training set",
                self.corpus.region(region).id
            )));
        }
        let label = Label::from_bool(self.corpus.region(region).has(predicate));
        self.record_label(predicate, region, label)?;
        self.refresh_overlay(predicate);
        Ok(label)
    }

    /// A uniformly chosen positive active-train region, or `None` after
    /// labeling every active-train region negative.
    pub fn answer_example_query(&mut self, predicate: PredicateId) -> Result<Option<RegionIdx>> {
        self.require_live()?;
        self.state.asked_examples.insert(predicate);
        let active_train = self.state.interaction.active_train.clone();
        let positives: Vec<RegionIdx> = active_train
            .iter()
            .copied()
            .filter(|&r| self.corpus.region(r).has(predicate))
            .collect();
        let answer = match positives.choose(&mut self.rng) {
            Some(&r) => {
                self.record_label(predicate, r, Label::Positive)?;
                Some(r)
            }
            None => {
                for &r in &active_train {
                    self.record_label(predicate, r, Label::Negative)?;
                }
                None
            }
        };
        self.refresh_overlay(predicate);
        Ok(answer)
    }

    /// Applies an action. Queries cost `per_query`; a guess ends the dialog.
    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        self.step_recorded(action, Vec::new(), 0)
    }

    /// Like [`Episode::step`], also logging the beam features the policy saw.
    pub fn step_recorded(&mut self, action: Action, beam: Vec<FeatureVector>, chosen: usize) -> Result<StepResult> {
        self.require_live()?;
        if action.is_query() && self.at_turn_cap() {
            return Err(Error::Protocol(format!("turn cap {} reached: only a guess is admissible", self.config.t_max)));
        }
        let rewards = self.config.rewards;
        let mut example = None;
        let reward = match action {
            Action::LabelQuery { predicate, region } => {
                self.answer_label_query(predicate, region)?;
                rewards.per_query
            }
            Action::ExampleQuery { predicate } => {
                example = Some(self.answer_example_query(predicate)?);
                rewards.per_query
            }
            Action::Guess => {
                let scores = score_objects(
                    &self.state.interaction.description,
                    &*self,
                    &self.state.interaction.active_test,
                    self.corpus,
                );
                let guess = scores.best();
                self.state.guess = Some(guess);
                self.state.terminated = true;
                if guess == self.state.interaction.target {
                    rewards.correct_guess
                } else {
                    rewards.incorrect_guess
                }
            }
        };
        self.state.transcript.push(TranscriptEntry { turn: self.state.turn, beam, chosen, action, reward });
        self.state.turn += 1;
        Ok(StepResult { reward, terminated: self.state.terminated, example })
    }

    pub fn returns(&self) -> Result<Vec<f64>> {
        if !self.state.terminated {
            return Err(Error::Protocol("returns need a terminated episode".into()));
        }
        Ok(discounted_returns(
            self.state.transcript.iter().map(|e| e.reward),
            self.config.rewards.gamma,
        ))
    }
}

/// `G_t = sum_{u >= t} gamma^(u - t) r_u`.
pub fn discounted_returns(rewards: impl DoubleEndedIterator<Item = f64> + ExactSizeIterator, gamma: f64) -> Vec<f64> {
    let mut out = alloc::vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (i, r) in rewards.enumerate().rev() {
        acc = r + gamma * acc;
        out[i] = acc;
    }
    out
}

/// Per-step returns of a finished transcript.
pub fn episode_return(transcript: &[TranscriptEntry], gamma: f64) -> Result<Vec<f64>> {
    match transcript.last() {
        Some(e) if e.action == Action::Guess => Ok(discounted_returns(transcript.iter().map(|e| e.reward), gamma)),
        _ => Err(Error::Protocol("returns need a transcript ending in a guess".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn tail_sums() {
        assert_eq!(discounted_returns([-1.0, -1.0, 200.0].into_iter(), 1.0), [198.0, 199.0, 200.0]);
        assert_eq!(discounted_returns([200.0].into_iter(), 1.0), [200.0]);
        assert_eq!(discounted_returns([-1.0, -100.0].into_iter(), 0.5), [-51.0, -100.0]);
    }

    #[test]
    fn unfinished_transcript_has_no_return() {
        let e = TranscriptEntry {
            turn: 0,
            beam: vec![],
            chosen: 0,
            action: Action::ExampleQuery { predicate: PredicateId(0) },
            reward: -1.0,
        };
        assert!(episode_return(&[e], 1.0).is_err());
        assert!(episode_return(&[], 1.0).is_err());
    }

    #[test]
    fn reward_invariants() {
        assert!(RewardConfig::default().validate().is_ok());
        assert!(RewardConfig { correct_guess: -1.0, ..Default::default() }.validate().is_err());
        assert!(RewardConfig { incorrect_guess: -0.5, ..Default::default() }.validate().is_err());
        assert!(RewardConfig { gamma: 0.0, ..Default::default() }.validate().is_err());
    }
}
