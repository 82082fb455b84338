//! Config to artifacts: load or generate the corpus, run the experiment and
//! write the run directory.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use oal_core::corpus::{generate_synthetic, RegionRecord};
use oal_core::harness::{no_query_floor, run_from, Benchmark, Phase, RunState};
use oal_core::Corpus;

use crate::checkpoint;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::formats::{load_regions, write_jsonl, Format};
use crate::manifest::{fingerprint, RunManifest, MANIFEST_FILE};
use crate::outputs::{write_metrics_csv, write_transcripts, Summary, METRICS_FILE, SUMMARY_FILE, TRANSCRIPTS_FILE};
use crate::runner::RayonRunner;
use crate::stemmer::{english_extractor, PorterStemmer};

pub const CHECKPOINT_DIR: &str = "checkpoints";

pub struct LoadedCorpus {
    pub records: Vec<RegionRecord>,
    pub corpus: Corpus,
    pub fingerprint: String,
    pub source: String,
}

/// Reads the configured region file, or generates the synthetic corpus.
pub fn load_corpus(cfg: &RunConfig) -> CliResult<LoadedCorpus> {
    let (records, fp, source) = match &cfg.corpus {
        Some(path) => {
            let format = Format::from_path(path).map_err(CliError::config)?;
            let bytes = std::fs::read(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(CliError::data)?;
            let records = load_regions(path, format).map_err(CliError::data)?;
            (records, fingerprint(&bytes), path.display().to_string())
        }
        None => {
            let records = generate_synthetic(&cfg.synthetic).map_err(CliError::from_core)?;
            let mut bytes = Vec::new();
            write_jsonl(&mut bytes, &records).map_err(CliError::runtime)?;
            (records, fingerprint(&bytes), format!("synthetic(seed={})", cfg.synthetic.seed))
        }
    };
    let stemmer = PorterStemmer::default();
    let corpus = Corpus::from_records(records.clone(), &english_extractor(&stemmer)).map_err(CliError::from_core)?;
    Ok(LoadedCorpus { records, corpus, fingerprint: fp, source })
}

pub fn checkpoint_path(out: &Path, state_metrics: usize) -> PathBuf {
    out.join(CHECKPOINT_DIR).join(format!("batch-{state_metrics:03}.json"))
}

fn configure_threads(threads: usize) {
    // A global pool can only be built once per process; later calls keep it.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
}

/// Runs the experiment into `out`, optionally resuming from a checkpoint.
pub fn run_to_dir(cfg: &RunConfig, out: &Path, resume: Option<&Path>, command: &str) -> CliResult<Summary> {
    cfg.validate().map_err(CliError::config)?;
    let exp = &cfg.experiment;
    let data = load_corpus(cfg)?;
    let bench = Benchmark::new(data.corpus, exp).map_err(CliError::from_core)?;
    configure_threads(cfg.threads);

    let mut state = match resume {
        Some(path) => checkpoint::load_for(path, exp).map_err(CliError::data)?,
        None => RunState::default(),
    };
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(CliError::runtime)?;
    if cfg.checkpoints {
        std::fs::create_dir_all(out.join(CHECKPOINT_DIR)).map_err(CliError::runtime)?;
    }
    let mut transcripts = if cfg.transcripts {
        let path = out.join(TRANSCRIPTS_FILE);
        let file = if resume.is_some() {
            OpenOptions::new().create(true).append(true).open(&path)
        } else {
            File::create(&path)
        };
        Some(BufWriter::new(file.with_context(|| format!("opening {}", path.display())).map_err(CliError::runtime)?))
    } else {
        None
    };

    let mut observer = |state: &RunState, outcome: &oal_core::harness::BatchOutcome| -> oal_core::Result<()> {
        let io = |e: anyhow::Error| oal_core::Error::Episode(format!("{e:#}"));
        if let Some(w) = transcripts.as_mut() {
            write_transcripts(w, &bench.corpus, outcome).map_err(io)?;
        }
        if cfg.checkpoints {
            checkpoint::save(&checkpoint_path(out, state.metrics.len()), exp, state).map_err(io)?;
        }
        Ok(())
    };
    run_from(&bench, exp, &mut state, &RayonRunner, None, &mut observer).map_err(CliError::from_core)?;
    if let Some(mut w) = transcripts {
        w.flush().map_err(CliError::runtime)?;
    }

    let final_test = state
        .final_batch(Phase::Test)
        .ok_or_else(|| CliError::runtime(anyhow::anyhow!("run ended without a test batch")))?;
    let floor = no_query_floor(&bench, exp, Phase::Test, final_test.batch, &RayonRunner).map_err(CliError::from_core)?;
    let summary = Summary::new(exp, &data.fingerprint, final_test, &floor).map_err(CliError::runtime)?;

    let write = |name: &str, bytes: Vec<u8>| -> CliResult<()> {
        std::fs::write(out.join(name), bytes)
            .with_context(|| format!("writing {name}"))
            .map_err(CliError::runtime)
    };
    let mut csv = Vec::new();
    write_metrics_csv(&mut csv, &state.metrics).map_err(CliError::runtime)?;
    write(METRICS_FILE, csv)?;
    let mut json = serde_json::to_vec_pretty(&summary).map_err(CliError::runtime)?;
    json.push(b'\n');
    write(SUMMARY_FILE, json)?;

    let config_json = serde_json::to_value(cfg).map_err(CliError::runtime)?;
    let mut manifest = RunManifest::new(command, config_json, data.fingerprint.clone(), data.source, exp.seed);
    manifest.outputs = vec![METRICS_FILE.into(), SUMMARY_FILE.into(), MANIFEST_FILE.into()];
    if cfg.transcripts {
        manifest.outputs.push(TRANSCRIPTS_FILE.into());
    }
    if cfg.checkpoints {
        manifest.outputs.push(format!("{CHECKPOINT_DIR}/"));
    }
    manifest.write(&out.join(MANIFEST_FILE)).map_err(CliError::runtime)?;
    Ok(summary)
}
