#![allow(dead_code)]

use oal_core::corpus::{generate_synthetic, RegionRecord, SyntheticConfig};
use oal_core::harness::{Benchmark, ExperimentConfig, PhaseBatches};
use oal_core::text::{IdentityStemmer, PredicateExtractor, ENGLISH_STOPWORDS};
use oal_core::Corpus;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn extractor() -> PredicateExtractor<'static> {
    PredicateExtractor::new(ENGLISH_STOPWORDS, &IdentityStemmer)
}

pub fn synthetic_corpus(config: &SyntheticConfig) -> Corpus {
    Corpus::from_records(generate_synthetic(config).unwrap(), &extractor()).unwrap()
}

/// Regions with the given feature rows and a single shared annotation.
pub fn corpus_from_rows(rows: &[Vec<f64>]) -> Corpus {
    let records = rows
        .iter()
        .enumerate()
        .map(|(i, x)| RegionRecord { id: i as u64, features: x.clone(), annotations: vec!["thing".into()], description: None })
        .collect();
    Corpus::from_records(records, &extractor()).unwrap()
}

pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect()
}

/// The default protocol at desk scale, with a shorter schedule.
pub fn small_config(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig { seed, ..ExperimentConfig::default() };
    cfg.split.frequency_threshold = 150;
    cfg.batches = PhaseBatches { init: 2, train: 2, test: 2 };
    cfg.batch_size = 20;
    cfg
}

pub fn benchmark(cfg: &ExperimentConfig) -> Benchmark {
    Benchmark::new(synthetic_corpus(&SyntheticConfig::default()), cfg).unwrap()
}
