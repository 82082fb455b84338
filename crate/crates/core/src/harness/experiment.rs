use alloc::vec::Vec;

use super::batch::{finish_batch, run_batch, sample_batch, Actor, BatchMetrics, BatchOutcome, Benchmark, EpisodeRunner};
use super::config::{Arm, ExperimentConfig, Phase};
use crate::agent::AgentState;
use crate::error::Result;
use crate::policy::{reinforce_update, PolicyParams, StaticConfig};

/// The next batch to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cursor {
    pub phase: Phase,
    pub batch: u32,
}

impl Cursor {
    pub const START: Cursor = Cursor { phase: Phase::Init, batch: 0 };
}

/// Resumable experiment state.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunState {
    pub agent: AgentState,
    pub policy: PolicyParams,
    /// `None` once every batch has run.
    pub cursor: Option<Cursor>,
    pub metrics: Vec<BatchMetrics>,
}

impl Default for RunState {
    fn default() -> Self {
        Self::at(Cursor::START, PolicyParams::default())
    }
}

impl RunState {
    /// Fresh agent positioned at `cursor` with the given policy weights.
    pub fn at(cursor: Cursor, policy: PolicyParams) -> Self {
        Self { agent: AgentState::default(), policy, cursor: Some(cursor), metrics: Vec::new() }
    }

    pub fn is_finished(&self) -> bool {
        self.cursor.is_none()
    }

    pub fn final_batch(&self, phase: Phase) -> Option<&BatchMetrics> {
        self.metrics.iter().rev().find(|m| m.phase == phase)
    }
}

fn advance(cursor: Cursor, config: &ExperimentConfig) -> Option<Cursor> {
    if cursor.batch + 1 < config.batches.get(cursor.phase) {
        Some(Cursor { phase: cursor.phase, batch: cursor.batch + 1 })
    } else {
        cursor.phase.next().map(|phase| Cursor { phase, batch: 0 })
    }
}

fn actor_for<'p>(phase: Phase, config: &ExperimentConfig, policy: &'p PolicyParams) -> Actor<'p> {
    match (phase, config.arm) {
        (Phase::Init, _) | (_, Arm::Static) => Actor::Static(config.static_policy),
        _ => Actor::Learned(policy),
    }
}

/// Runs one batch at the state's cursor: phase reset if the batch opens a
/// phase, dialogs, label merge, statistics, and the policy update.
pub fn step_batch(
    bench: &Benchmark,
    config: &ExperimentConfig,
    state: &mut RunState,
    runner: &(dyn EpisodeRunner + Sync),
) -> Result<Option<BatchOutcome>> {
    let Some(cursor) = state.cursor else {
        return Ok(None);
    };
    let mask = config.mask()?;
    if cursor.batch == 0 {
        state.agent.reset_perception();
    }
    let interactions = sample_batch(bench, config, cursor.phase, cursor.batch)?;
    for i in &interactions {
        state.agent.register(&i.description);
    }
    let actor = actor_for(cursor.phase, config, &state.policy);
    let outcome = run_batch(
        bench,
        &state.agent,
        config,
        actor,
        &mask,
        cursor.phase,
        cursor.batch,
        &interactions,
        runner,
    )?;
    finish_batch(&mut state.agent, bench, config, &outcome)?;
    if cursor.phase.updates_policy() {
        reinforce_update(
            &mut state.policy,
            &config.policy,
            outcome.episodes.iter().map(|e| (e.transcript.as_slice(), e.returns.as_slice())),
        )?;
    }
    state.metrics.push(outcome.metrics.clone());
    state.cursor = advance(cursor, config);
    Ok(Some(outcome))
}

/// Runs batches until the experiment ends or `max_batches` have run,
/// handing each finished batch to `observer`.
pub fn run_from(
    bench: &Benchmark,
    config: &ExperimentConfig,
    state: &mut RunState,
    runner: &(dyn EpisodeRunner + Sync),
    max_batches: Option<u32>,
    observer: &mut dyn FnMut(&RunState, &BatchOutcome) -> Result<()>,
) -> Result<()> {
    config.validate()?;
    let mut ran = 0;
    while max_batches.map_or(true, |m| ran < m) {
        match step_batch(bench, config, state, runner)? {
            Some(outcome) => observer(state, &outcome)?,
            None => break,
        }
        ran += 1;
    }
    Ok(())
}

/// Runs all three phases from scratch.
pub fn run_experiment(
    bench: &Benchmark,
    config: &ExperimentConfig,
    runner: &(dyn EpisodeRunner + Sync),
) -> Result<RunState> {
    let mut state = RunState::default();
    run_from(bench, config, &mut state, runner, None, &mut |_, _| Ok(()))?;
    Ok(state)
}

/// Guessing at once with no classifiers, on the interactions of the given
/// batch: the no-query floor.
pub fn no_query_floor(
    bench: &Benchmark,
    config: &ExperimentConfig,
    phase: Phase,
    batch: u32,
    runner: &(dyn EpisodeRunner + Sync),
) -> Result<BatchMetrics> {
    let interactions = sample_batch(bench, config, phase, batch)?;
    let agent = AgentState::default();
    let mask = config.mask()?;
    let actor = Actor::Static(StaticConfig { n_queries: 0 });
    Ok(run_batch(bench, &agent, config, actor, &mask, phase, batch, &interactions, runner)?.metrics)
}
