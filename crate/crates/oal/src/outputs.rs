//! Run artifacts: the metrics table, the summary, transcripts and the
//! feature registry table.

use std::io::Write;

use oal_core::env::Action;
use oal_core::harness::{compare, BatchMetrics, BatchOutcome, Phase, WelchResult};
use oal_core::policy::REGISTRY;
use oal_core::Corpus;
use serde::{Deserialize, Serialize};

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TRANSCRIPTS_FILE: &str = "transcripts.jsonl";
pub const SUMMARY_VERSION: u32 = 1;

pub fn write_metrics_csv(w: impl Write, metrics: &[BatchMetrics]) -> anyhow::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["phase", "batch", "success_rate", "mean_length", "mean_queries"])?;
    for m in metrics {
        wtr.write_record([
            m.phase.as_str().to_string(),
            m.batch.to_string(),
            m.success_rate.to_string(),
            m.mean_length.to_string(),
            m.mean_queries.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Per-episode results of one batch, kept for significance tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSample {
    pub phase: Phase,
    pub batch: u32,
    pub success_rate: f64,
    pub mean_length: f64,
    pub mean_queries: f64,
    pub successes: Vec<u8>,
    pub lengths: Vec<u32>,
}

impl BatchSample {
    pub fn from_metrics(m: &BatchMetrics) -> Self {
        Self {
            phase: m.phase,
            batch: m.batch,
            success_rate: m.success_rate,
            mean_length: m.mean_length,
            mean_queries: m.mean_queries,
            successes: m.successes.iter().map(|&s| u8::from(s)).collect(),
            lengths: m.lengths.clone(),
        }
    }

    pub fn success_values(&self) -> Vec<f64> {
        self.successes.iter().map(|&s| f64::from(s)).collect()
    }

    pub fn length_values(&self) -> Vec<f64> {
        self.lengths.iter().map(|&l| f64::from(l)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: u32,
    pub arm: String,
    pub ablate: Vec<String>,
    pub corpus_fingerprint: String,
    pub master_seed: u64,
    pub final_test: BatchSample,
    /// Immediate guesses without classifiers on the same final-batch dialogs.
    pub no_query_floor: BatchSample,
    pub success_vs_floor: Option<WelchResult>,
    pub config: serde_json::Value,
}

impl Summary {
    pub fn new(
        config: &oal_core::harness::ExperimentConfig,
        fingerprint: &str,
        final_test: &BatchMetrics,
        floor: &BatchMetrics,
    ) -> anyhow::Result<Self> {
        let final_test = BatchSample::from_metrics(final_test);
        let floor = BatchSample::from_metrics(floor);
        Ok(Self {
            version: SUMMARY_VERSION,
            arm: serde_json::to_value(config.arm)?.as_str().unwrap_or_default().to_string(),
            ablate: config.ablate.clone(),
            corpus_fingerprint: fingerprint.into(),
            master_seed: config.seed,
            success_vs_floor: compare(&final_test.success_values(), &floor.success_values()),
            final_test,
            no_query_floor: floor,
            config: serde_json::to_value(config)?,
        })
    }
}

#[derive(Serialize)]
struct TranscriptLine<'a> {
    phase: &'a str,
    batch: u32,
    episode: u32,
    turn: u32,
    action: String,
    #[serde(flatten)]
    raw: &'a Action,
    reward: f64,
    features: &'a [f64],
    beam_size: usize,
}

/// One line per action taken in the batch.
pub fn write_transcripts(w: &mut impl Write, corpus: &Corpus, outcome: &BatchOutcome) -> anyhow::Result<()> {
    let phase = outcome.metrics.phase.as_str();
    for e in &outcome.episodes {
        for t in &e.transcript {
            let line = TranscriptLine {
                phase,
                batch: outcome.metrics.batch,
                episode: e.episode,
                turn: t.turn,
                action: t.action.describe(corpus),
                raw: &t.action,
                reward: t.reward,
                features: t.beam.get(t.chosen).map_or(&[][..], |f| f.as_slice()),
                beam_size: t.beam.len(),
            };
            serde_json::to_writer(&mut *w, &line)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// The feature registry as CSV: index, name, action types, normalization,
/// range.
pub fn write_registry(w: impl Write) -> anyhow::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["index", "name", "actions", "normalization", "min", "max"])?;
    for s in REGISTRY.iter() {
        wtr.write_record([
            s.index.to_string(),
            s.name.to_string(),
            s.applies.as_str().to_string(),
            s.normalization.to_string(),
            s.range.0.to_string(),
            s.range.1.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn format_welch(r: Option<&WelchResult>) -> String {
    match r {
        Some(r) => format!("t={:.3} df={:.1} p={:.4}", r.t, r.df, r.p_two_sided),
        None => "n/a".into(),
    }
}
