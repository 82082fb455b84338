use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::config::{ExperimentConfig, Phase};
use crate::agent::AgentState;
use crate::corpus::{make_splits, Corpus, CorpusSplit, Interaction, PredicateId, Side};
use crate::env::{episode_return, Episode, PendingLabel, TranscriptEntry};
use crate::error::{Error, Result};
use crate::perception::DensityIndex;
use crate::policy::{action_probabilities, sample_action, static_policy_act, FeatureMask, PolicyParams, StaticConfig, TurnFeatures};
use crate::querygen::build_beam;
use crate::rng::{purpose, stream};

/// Corpus, splits and density index: everything read-only an experiment needs.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub corpus: Corpus,
    pub split: CorpusSplit,
    pub density: DensityIndex,
}

impl Benchmark {
    pub fn new(corpus: Corpus, config: &ExperimentConfig) -> Result<Self> {
        let split = make_splits(&corpus, &config.split)?;
        let density = DensityIndex::build(&corpus, &config.density);
        Ok(Self { corpus, split, density })
    }
}

/// Who picks actions in a batch.
#[derive(Debug, Clone, Copy)]
pub enum Actor<'p> {
    Learned(&'p PolicyParams),
    Static(StaticConfig),
}

/// Everything one dialog produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub episode: u32,
    pub interaction: Interaction,
    pub transcript: Vec<TranscriptEntry>,
    pub returns: Vec<f64>,
    pub pending_labels: Vec<PendingLabel>,
    pub success: bool,
}

impl EpisodeRecord {
    pub fn queries(&self) -> u32 {
        self.transcript.iter().filter(|e| e.action.is_query()).count() as u32
    }

    /// System turns, the final guess included.
    pub fn length(&self) -> u32 {
        self.transcript.len() as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BatchMetrics {
    pub phase: Phase,
    pub batch: u32,
    pub success_rate: f64,
    pub mean_length: f64,
    pub mean_queries: f64,
    /// Oracle labels handed out per predicate, repeats included.
    pub label_counts: BTreeMap<PredicateId, u64>,
    pub successes: Vec<bool>,
    pub lengths: Vec<u32>,
}

impl BatchMetrics {
    pub fn from_records(phase: Phase, batch: u32, records: &[EpisodeRecord]) -> Self {
        let n = records.len().max(1) as f64;
        let successes: Vec<bool> = records.iter().map(|r| r.success).collect();
        let lengths: Vec<u32> = records.iter().map(|r| r.length()).collect();
        let mut label_counts = BTreeMap::new();
        for l in records.iter().flat_map(|r| &r.pending_labels) {
            *label_counts.entry(l.predicate).or_insert(0) += 1;
        }
        Self {
            phase,
            batch,
            success_rate: successes.iter().filter(|&&s| s).count() as f64 / n,
            mean_length: lengths.iter().map(|&l| f64::from(l)).sum::<f64>() / n,
            mean_queries: records.iter().map(|r| f64::from(r.queries())).sum::<f64>() / n,
            label_counts,
            successes,
            lengths,
        }
    }

    pub fn success_indicators(&self) -> Vec<f64> {
        self.successes.iter().map(|&s| f64::from(u8::from(s))).collect()
    }

    pub fn length_values(&self) -> Vec<f64> {
        self.lengths.iter().map(|&l| f64::from(l)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub metrics: BatchMetrics,
    pub episodes: Vec<EpisodeRecord>,
}

/// Runs independent episodes. Implementations may run them concurrently but
/// must return records in index order.
pub trait EpisodeRunner {
    fn run(&self, count: usize, episode: &(dyn Fn(usize) -> Result<EpisodeRecord> + Sync)) -> Result<Vec<EpisodeRecord>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl EpisodeRunner for Sequential {
    fn run(&self, count: usize, episode: &(dyn Fn(usize) -> Result<EpisodeRecord> + Sync)) -> Result<Vec<EpisodeRecord>> {
        (0..count).map(episode).collect()
    }
}

fn side_of(phase: Phase) -> Side {
    match phase {
        Phase::Init | Phase::Train => Side::PolicyTrain,
        Phase::Test => Side::PolicyTest,
    }
}

/// The batch's interactions. They depend only on the master seed and the
/// `(phase, batch, episode)` coordinates, so every arm sees the same ones.
pub fn sample_batch(bench: &Benchmark, config: &ExperimentConfig, phase: Phase, batch: u32) -> Result<Vec<Interaction>> {
    (0..config.batch_size)
        .map(|e| {
            let mut rng = stream(config.seed, &[purpose::INTERACTION, phase.code(), u64::from(batch), u64::from(e)]);
            crate::corpus::sample_interaction(&bench.corpus, &bench.split, side_of(phase), config.interaction, &mut rng)
        })
        .collect()
}

/// Plays one dialog to its guess.
pub fn run_episode(
    bench: &Benchmark,
    agent: &AgentState,
    config: &ExperimentConfig,
    actor: Actor<'_>,
    mask: &FeatureMask,
    interaction: Interaction,
    coords: [u64; 3],
) -> Result<EpisodeRecord> {
    let [phase, batch, index] = coords;
    let oracle_rng = stream(config.seed, &[purpose::EPISODE, phase, batch, index, 0]);
    let mut rng = stream(config.seed, &[purpose::EPISODE, phase, batch, index, 1]);
    let mut ep = Episode::start(&bench.corpus, agent, &config.env, interaction, oracle_rng)?;
    let limit = config.env.t_max + 1;
    while !ep.state().terminated {
        if ep.state().turn >= limit {
            return Err(Error::Episode("dialog exceeded the turn cap".into()));
        }
        let beam = build_beam(&ep, &config.beam, &config.triangular, &mut rng);
        let features = TurnFeatures::new(&ep, &bench.density).featurize_beam(&beam, mask)?;
        let chosen = match actor {
            Actor::Learned(params) => sample_action(&action_probabilities(&params.theta, &features), &mut rng),
            Actor::Static(cfg) => static_policy_act(ep.state().turn, &beam, &cfg, &mut rng),
        };
        ep.step_recorded(beam[chosen], features, chosen)?;
    }
    let state = ep.into_state();
    let returns = episode_return(&state.transcript, config.env.rewards.gamma)?;
    Ok(EpisodeRecord {
        episode: index as u32,
        success: state.success() == Some(true),
        interaction: state.interaction,
        transcript: state.transcript,
        returns,
        pending_labels: state.pending_labels,
    })
}

/// Runs a batch of dialogs against a frozen agent.
#[allow(clippy::too_many_arguments)]
pub fn run_batch(
    bench: &Benchmark,
    agent: &AgentState,
    config: &ExperimentConfig,
    actor: Actor<'_>,
    mask: &FeatureMask,
    phase: Phase,
    batch: u32,
    interactions: &[Interaction],
    runner: &(dyn EpisodeRunner + Sync),
) -> Result<BatchOutcome> {
    let episodes = runner.run(interactions.len(), &|i| {
        run_episode(
            bench,
            agent,
            config,
            actor,
            mask,
            interactions[i].clone(),
            [phase.code(), u64::from(batch), i as u64],
        )
    })?;
    Ok(BatchOutcome { metrics: BatchMetrics::from_records(phase, batch, &episodes), episodes })
}

/// Merges a batch's labels into the classifiers, refits what changed and
/// updates usage statistics.
pub fn finish_batch(agent: &mut AgentState, bench: &Benchmark, config: &ExperimentConfig, outcome: &BatchOutcome) -> Result<()> {
    let labels = outcome
        .episodes
        .iter()
        .flat_map(|e| &e.pending_labels)
        .map(|l| (l.predicate, l.region, l.label));
    agent
        .apply_labels(labels, &bench.corpus, &config.env.classifier, config.env.f1_folds)
        .map_err(|(p, r)| Error::LabelConflict {
            predicate: bench.corpus.predicate_name(p).into(),
            region: bench.corpus.region(r).id,
        })?;
    for e in &outcome.episodes {
        agent.stats.record_dialog(&e.interaction.description, e.success);
    }
    Ok(())
}
