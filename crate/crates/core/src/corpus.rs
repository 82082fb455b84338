//! Regions, the predicate vocabulary, synthetic corpora, the four-way split
//! and interaction sampling.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::text::PredicateExtractor;

/// Interned predicate name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PredicateId(pub u32);

/// Position of a region in a [`Corpus`]. Regions are stored sorted by id, so
/// ordering by index is ordering by region id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionIdx(pub u32);

impl RegionIdx {
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

/// A region description as it appears in an input file.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum Description {
    /// Free text, routed through stopword removal and stemming.
    Text(String),
    /// Pre-tokenized predicates, normalized like annotations.
    Predicates(Vec<String>),
}

/// One region as read from (or written to) a corpus file.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionRecord {
    pub id: u64,
    pub features: Vec<f64>,
    pub annotations: Vec<String>,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub description: Option<Description>,
}

/// A normalized region.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: u64,
    pub features: Vec<f64>,
    /// Sorted, deduplicated.
    pub annotations: Vec<PredicateId>,
    /// Ordered description predicates; empty when the region has no description.
    pub description: Vec<PredicateId>,
}

impl Region {
    pub fn has(&self, predicate: PredicateId) -> bool {
        self.annotations.binary_search(&predicate).is_ok()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    names: Vec<String>,
    index: BTreeMap<String, PredicateId>,
}

impl Vocabulary {
    pub fn intern(&mut self, name: &str) -> PredicateId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = PredicateId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<PredicateId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: PredicateId) -> &str {
        &self.names[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = PredicateId> {
        (0..self.names.len() as u32).map(PredicateId)
    }
}

/// An immutable, validated region collection sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    dim: usize,
    regions: Vec<Region>,
    vocab: Vocabulary,
}

impl Corpus {
    /// Normalizes and validates raw records.
    ///
    /// Annotation strings are tokenized and stemmed; text descriptions also
    /// lose their stopwords. Every description predicate must be one of the
    /// region's annotations so the simulated oracle stays consistent.
    pub fn from_records(records: Vec<RegionRecord>, extractor: &PredicateExtractor<'_>) -> Result<Self> {
        let Some(first) = records.first() else {
            return Err(Error::Corpus("no regions".into()));
        };
        let dim = first.features.len();
        if dim == 0 {
            return Err(Error::Corpus(format!("region {} has an empty feature vector", first.id)));
        }

        let mut seen = BTreeSet::new();
        let mut vocab = Vocabulary::default();
        let mut regions = Vec::with_capacity(records.len());
        for record in records {
            if record.features.len() != dim {
                return Err(Error::Corpus(format!(
                    "region {} has {} features, expected {dim}",
                    record.id,
                    record.features.len()
                )));
            }
            if record.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::Corpus(format!("region {} has non-finite features", record.id)));
            }
            if !seen.insert(record.id) {
                return Err(Error::Corpus(format!("duplicate region id {}", record.id)));
            }

            let mut annotations: Vec<PredicateId> = record
                .annotations
                .iter()
                .flat_map(|a| extractor.normalize_annotation(a))
                .map(|name| vocab.intern(&name))
                .collect();
            annotations.sort_unstable();
            annotations.dedup();

            let description_names = match &record.description {
                None => Vec::new(),
                Some(Description::Text(text)) => extractor.extract(text).map_err(|e| {
                    Error::Corpus(format!("region {}: {e}", record.id))
                })?,
                Some(Description::Predicates(list)) => {
                    let mut out: Vec<String> = Vec::new();
                    for name in list.iter().flat_map(|p| extractor.normalize_annotation(p)) {
                        if !out.contains(&name) {
                            out.push(name);
                        }
                    }
                    out
                }
            };
            let mut description = Vec::with_capacity(description_names.len());
            for name in &description_names {
                match vocab.get(name) {
                    Some(id) if annotations.binary_search(&id).is_ok() => description.push(id),
                    _ => {
                        return Err(Error::Corpus(format!(
                            "region {}: description predicate `{name}` is not among its annotations",
                            record.id
                        )))
                    }
                }
            }

            regions.push(Region { id: record.id, features: record.features, annotations, description });
        }
        regions.sort_by_key(|r| r.id);
        Ok(Self { dim, regions, vocab })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, idx: RegionIdx) -> &Region {
        &self.regions[idx.get()]
    }

    pub fn features(&self, idx: RegionIdx) -> &[f64] {
        &self.regions[idx.get()].features
    }

    pub fn indices(&self) -> impl Iterator<Item = RegionIdx> {
        (0..self.regions.len() as u32).map(RegionIdx)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn predicate_name(&self, p: PredicateId) -> &str {
        self.vocab.name(p)
    }

    pub fn find_region(&self, id: u64) -> Option<RegionIdx> {
        self.regions
            .binary_search_by_key(&id, |r| r.id)
            .ok()
            .map(|i| RegionIdx(i as u32))
    }

    /// Number of regions annotated with each predicate.
    pub fn predicate_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0usize; self.vocab.len()];
        for region in &self.regions {
            for p in &region.annotations {
                counts[p.0 as usize] += 1;
            }
        }
        counts
    }
}

// ---------------------------------------------------------------------------
// Synthetic corpora
// ---------------------------------------------------------------------------

/// How often each synthetic predicate applies, as the probability that a
/// standard-normal feature point falls inside its half-space.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum FrequencyProfile {
    Uniform { coverage: f64 },
    /// Coverage decays geometrically from `max` (first predicate) to `min` (last).
    Geometric { max: f64, min: f64 },
}

impl FrequencyProfile {
    fn coverage(&self, i: usize, n: usize) -> f64 {
        match *self {
            FrequencyProfile::Uniform { coverage } => coverage,
            FrequencyProfile::Geometric { max, min } => {
                if n <= 1 {
                    max
                } else {
                    let t = i as f64 / (n - 1) as f64;
                    max * libm::pow(min / max, t)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |c: f64| c > 0.0 && c < 1.0;
        let valid = match *self {
            FrequencyProfile::Uniform { coverage } => ok(coverage),
            FrequencyProfile::Geometric { max, min } => ok(max) && ok(min),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Generation("predicate coverage must lie in (0, 1)".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SyntheticConfig {
    pub n_regions: usize,
    pub dim: usize,
    pub n_predicates: usize,
    pub profile: FrequencyProfile,
    /// Inclusive range of description lengths.
    pub description_len: (usize, usize),
    pub seed: u64,
    /// Draws allowed per region before giving up on a non-empty annotation set.
    pub max_resamples: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_regions: 600,
            dim: 32,
            n_predicates: 24,
            profile: FrequencyProfile::Geometric { max: 0.35, min: 0.05 },
            description_len: (1, 3),
            seed: 7,
            max_resamples: 1000,
        }
    }
}

/// Half-space `normal · x >= offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn contains(&self, x: &[f64]) -> bool {
        dot(&self.normal, x) >= self.offset
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn synthetic_predicate_name(i: usize) -> String {
    format!("p{i:02}")
}

const CALIBRATION_DRAWS: usize = 8192;

/// Draws the synthetic predicates: random unit normals with offsets placed so
/// that each half-space holds the profile's share of standard-normal points.
pub fn synthetic_halfspaces(config: &SyntheticConfig, rng: &mut StreamRng) -> Vec<HalfSpace> {
    // The projection of a standard normal point on a unit vector is N(0, 1),
    // so one sorted 1-D sample calibrates every offset.
    let mut calib: Vec<f64> = (0..CALIBRATION_DRAWS).map(|_| rng.sample(StandardNormal)).collect();
    calib.sort_by(f64::total_cmp);

    (0..config.n_predicates)
        .map(|i| {
            let mut normal: Vec<f64> = (0..config.dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = libm::sqrt(dot(&normal, &normal));
            normal.iter_mut().for_each(|v| *v /= norm);
            let coverage = config.profile.coverage(i, config.n_predicates);
            let q = ((1.0 - coverage) * CALIBRATION_DRAWS as f64) as usize;
            let offset = calib[q.min(CALIBRATION_DRAWS - 1)];
            HalfSpace { normal, offset }
        })
        .collect()
}

/// Generates a corpus whose predicates are half-spaces in feature space.
///
/// A region's annotations are exactly the half-spaces containing its feature
/// point, regions with no annotation are redrawn, and each description is a
/// uniform sample of annotations with a length drawn from `description_len`.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<Vec<RegionRecord>> {
    generate_synthetic_with_halfspaces(config).map(|(records, _)| records)
}

pub fn generate_synthetic_with_halfspaces(
    config: &SyntheticConfig,
) -> Result<(Vec<RegionRecord>, Vec<HalfSpace>)> {
    if config.n_regions < 12 {
        return Err(Error::Generation(format!(
            "n_regions = {} is below one interaction's worth (12)",
            config.n_regions
        )));
    }
    if config.n_predicates < 1 {
        return Err(Error::Generation("need at least one predicate".into()));
    }
    if config.dim == 0 {
        return Err(Error::Generation("feature dimension must be positive".into()));
    }
    let (lo, hi) = config.description_len;
    if lo == 0 || lo > hi {
        return Err(Error::Generation("description length range must satisfy 1 <= min <= max".into()));
    }
    config.profile.validate()?;

    let mut rng = rng::stream(config.seed, &[rng::purpose::SYNTHETIC]);
    let spaces = synthetic_halfspaces(config, &mut rng);
    let names: Vec<String> = (0..config.n_predicates).map(synthetic_predicate_name).collect();

    let mut records = Vec::with_capacity(config.n_regions);
    for id in 0..config.n_regions as u64 {
        let mut attempts = 0;
        let (features, annotations) = loop {
            if attempts == config.max_resamples {
                return Err(Error::Generation(format!(
                    "no region with a non-empty annotation set after {attempts} draws"
                )));
            }
            attempts += 1;
            let x: Vec<f64> = (0..config.dim).map(|_| rng.sample(StandardNormal)).collect();
            let ann: Vec<usize> = (0..spaces.len()).filter(|&p| spaces[p].contains(&x)).collect();
            if !ann.is_empty() {
                break (x, ann);
            }
        };
        let len = rng.gen_range(lo..=hi).min(annotations.len());
        let description: Vec<String> = annotations
            .choose_multiple(&mut rng, len)
            .map(|&p| names[p].clone())
            .collect();
        records.push(RegionRecord {
            id,
            features,
            annotations: annotations.iter().map(|&p| names[p].clone()).collect(),
            description: Some(Description::Predicates(description)),
        });
    }
    Ok((records, spaces))
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Side {
    PolicyTrain,
    PolicyTest,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SplitConfig {
    /// Predicates annotated on at least this many regions are "frequent".
    pub frequency_threshold: usize,
    /// Share of frequent predicates held out for the policy-test side.
    pub held_out_fraction: f64,
    /// Share of each side used as the classifier-training pool.
    pub classifier_train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            frequency_threshold: 1000,
            held_out_fraction: 0.5,
            classifier_train_fraction: 0.6,
            seed: 0,
        }
    }
}

/// Classifier-train and classifier-test pools of one policy side.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SidePools {
    pub classifier_train: Vec<RegionIdx>,
    pub classifier_test: Vec<RegionIdx>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSplit {
    pub policy_train: SidePools,
    pub policy_test: SidePools,
    pub held_out: Vec<PredicateId>,
}

impl CorpusSplit {
    pub fn side(&self, side: Side) -> &SidePools {
        match side {
            Side::PolicyTrain => &self.policy_train,
            Side::PolicyTest => &self.policy_test,
        }
    }

    pub fn policy_train_classifier_train(&self) -> &[RegionIdx] {
        &self.policy_train.classifier_train
    }
    pub fn policy_train_classifier_test(&self) -> &[RegionIdx] {
        &self.policy_train.classifier_test
    }
    pub fn policy_test_classifier_train(&self) -> &[RegionIdx] {
        &self.policy_test.classifier_train
    }
    pub fn policy_test_classifier_test(&self) -> &[RegionIdx] {
        &self.policy_test.classifier_test
    }
}

fn check_ratio(name: &str, r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::Split(format!("{name} must lie in (0, 1), got {r}")))
    }
}

/// Holds out a random share of the frequent predicates. Regions carrying any
/// held-out predicate form the policy-test side; the rest form policy-train.
/// Each side is then cut into classifier-train and classifier-test pools.
pub fn make_splits(corpus: &Corpus, config: &SplitConfig) -> Result<CorpusSplit> {
    if corpus.is_empty() {
        return Err(Error::Split("corpus is empty".into()));
    }
    check_ratio("held_out_fraction", config.held_out_fraction)?;
    check_ratio("classifier_train_fraction", config.classifier_train_fraction)?;

    let mut rng = rng::stream(config.seed, &[rng::purpose::SPLIT]);
    let counts = corpus.predicate_counts();
    let mut frequent: Vec<PredicateId> = corpus
        .vocab()
        .ids()
        .filter(|p| counts[p.0 as usize] >= config.frequency_threshold)
        .collect();
    if frequent.is_empty() {
        let max = counts.iter().copied().max().unwrap_or(0);
        return Err(Error::Split(format!(
            "no predicate appears in {} regions (most frequent: {max}); lower the frequency threshold",
            config.frequency_threshold
        )));
    }
    frequent.shuffle(&mut rng);
    let n_held = libm::ceil(config.held_out_fraction * frequent.len() as f64) as usize;
    let mut held_out: Vec<PredicateId> = frequent[..n_held.clamp(1, frequent.len())].to_vec();
    held_out.sort_unstable();

    let (mut test, mut train): (Vec<RegionIdx>, Vec<RegionIdx>) = corpus
        .indices()
        .partition(|&r| held_out.iter().any(|&p| corpus.region(r).has(p)));

    let mut cut = |pool: &mut Vec<RegionIdx>| {
        pool.shuffle(&mut rng);
        let n_train = libm::round(config.classifier_train_fraction * pool.len() as f64) as usize;
        let mut classifier_test = pool.split_off(n_train);
        let mut classifier_train = core::mem::take(pool);
        classifier_train.sort_unstable();
        classifier_test.sort_unstable();
        SidePools { classifier_train, classifier_test }
    };
    let policy_train = cut(&mut train);
    let policy_test = cut(&mut test);
    Ok(CorpusSplit { policy_train, policy_test, held_out })
}

// ---------------------------------------------------------------------------
// Interactions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InteractionSizes {
    pub train: usize,
    pub test: usize,
}

impl Default for InteractionSizes {
    fn default() -> Self {
        Self { train: 8, test: 4 }
    }
}

/// One dialog's setting.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interaction {
    /// Regions the agent may ask about.
    pub active_train: Vec<RegionIdx>,
    /// Regions the agent must retrieve from.
    pub active_test: Vec<RegionIdx>,
    pub target: RegionIdx,
    pub description: Vec<PredicateId>,
}

const TARGET_REDRAWS: usize = 64;

/// Samples an interaction from one policy side: the active training set from
/// the classifier-train pool, the active test set from the classifier-test
/// pool, and a target uniformly among active test regions with a description.
pub fn sample_interaction(
    corpus: &Corpus,
    split: &CorpusSplit,
    side: Side,
    sizes: InteractionSizes,
    rng: &mut StreamRng,
) -> Result<Interaction> {
    let pools = split.side(side);
    if sizes.train == 0 || sizes.test == 0 {
        return Err(Error::Sampling("interaction set sizes must be positive".into()));
    }
    if pools.classifier_train.len() < sizes.train || pools.classifier_test.len() < sizes.test {
        return Err(Error::Sampling(format!(
            "{side:?} pools hold {} / {} regions, need {} / {}",
            pools.classifier_train.len(),
            pools.classifier_test.len(),
            sizes.train,
            sizes.test
        )));
    }
    let active_train: Vec<RegionIdx> =
        pools.classifier_train.choose_multiple(rng, sizes.train).copied().collect();
    for _ in 0..TARGET_REDRAWS {
        let active_test: Vec<RegionIdx> =
            pools.classifier_test.choose_multiple(rng, sizes.test).copied().collect();
        let described: Vec<RegionIdx> = active_test
            .iter()
            .copied()
            .filter(|&r| !corpus.region(r).description.is_empty())
            .collect();
        if let Some(&target) = described.choose(rng) {
            return Ok(Interaction {
                description: corpus.region(target).description.clone(),
                active_train,
                active_test,
                target,
            });
        }
    }
    Err(Error::Sampling(format!(
        "no described target region found in {TARGET_REDRAWS} draws of the {side:?} test pool"
    )))
}
