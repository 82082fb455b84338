mod common;

use std::collections::BTreeMap;

use oal_core::grounding::{score_objects, GuessScores};
use oal_core::perception::{estimate_f1, train_linear};
use oal_core::querygen::{best_object_for_predicate, sample_predicates};
use oal_core::rng::stream;
use oal_core::{Label, LinearModel, PredicateId, PredicateModel, RegionIdx, TrainConfig, TriangularWeights};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::{corpus_from_rows, random_rows};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Stratified k-fold cross-validation written out longhand: positives, then
/// negatives, each dealt to folds in ascending region order.
fn cv_f1_oracle(labels: &[(usize, bool)], rows: &[Vec<f64>], folds: usize, cfg: &TrainConfig) -> f64 {
    let pos: Vec<usize> = labels.iter().filter(|l| l.1).map(|l| l.0).collect();
    let neg: Vec<usize> = labels.iter().filter(|l| !l.1).map(|l| l.0).collect();
    if labels.len() < 4 || pos.is_empty() || neg.is_empty() {
        return 0.0;
    }
    let k = folds.min(pos.len()).min(neg.len());
    let mut fold_of = BTreeMap::new();
    for class in [&pos, &neg] {
        let mut sorted = class.clone();
        sorted.sort();
        for (i, r) in sorted.into_iter().enumerate() {
            fold_of.insert(r, i % k);
        }
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for fold in 0..k {
        let mut train: Vec<(usize, bool)> = labels.iter().copied().filter(|(r, _)| fold_of[r] != fold).collect();
        train.sort();
        let model = train_linear(
            train.iter().map(|&(r, y)| (rows[r].as_slice(), Label::from_bool(y))),
            rows[0].len(),
            cfg,
        );
        for &(r, y) in labels.iter().filter(|(r, _)| fold_of[r] == fold) {
            let predicted = match &model {
                Some(m) => dot(&m.weights[..rows[r].len()], &rows[r]) + m.weights[rows[r].len()] >= 0.0,
                None => false,
            };
            match (predicted, y) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

#[test]
fn f1_estimate_matches_cross_validation_oracle() {
    let cfg = TrainConfig::default();
    let mut rng = stream(21, &[]);
    let mut degenerate = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=12);
        let rows = random_rows(&mut rng, n, 3);
        let corpus = corpus_from_rows(&rows);
        let p_pos = rng.gen_range(0.0..1.0);
        let labels: Vec<(usize, bool)> = (0..n).map(|i| (i, rng.gen_bool(p_pos))).collect();
        let map: BTreeMap<RegionIdx, Label> =
            labels.iter().map(|&(r, y)| (RegionIdx(r as u32), Label::from_bool(y))).collect();
        let folds = rng.gen_range(2..=5);
        let got = estimate_f1(&map, &corpus, &cfg, folds);
        let want = cv_f1_oracle(&labels, &rows, folds, &cfg);
        assert_eq!(got, want, "labels {labels:?} folds {folds}");
        let pos = labels.iter().filter(|l| l.1).count();
        if n < 4 || pos == 0 || pos == n {
            degenerate += 1;
            assert_eq!(got, 0.0);
        }
    }
    assert!(degenerate > 0);
}

fn brute_force_min_margin(model: &LinearModel, rows: &[Vec<f64>], candidates: &[usize]) -> usize {
    let d = rows[0].len();
    let norm = dot(&model.weights[..d], &model.weights[..d]).sqrt();
    let mut best = (f64::INFINITY, usize::MAX);
    for &r in candidates {
        let m = (dot(&model.weights[..d], &rows[r]) + model.weights[d]).abs() / norm;
        if m < best.0 || (m == best.0 && r < best.1) {
            best = (m, r);
        }
    }
    best.1
}

#[test]
fn uncertainty_sampling_picks_the_minimal_margin() {
    let cfg = TrainConfig::default();
    let mut rng = stream(22, &[]);
    let p = PredicateId(0);
    for _ in 0..1000 {
        // Eight active-train regions plus a separate training pool.
        let rows = random_rows(&mut rng, 20, 4);
        let corpus = corpus_from_rows(&rows);
        let w: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let train: Vec<(usize, Label)> =
            (8..20).map(|i| (i, Label::from_bool(dot(&w, &rows[i]) > 0.0))).collect();
        let Some(model) = train_linear(train.iter().map(|&(i, y)| (rows[i].as_slice(), y)), 4, &cfg) else {
            continue;
        };
        let labeled: Vec<bool> = (0..8).map(|_| rng.gen_bool(0.3)).collect();
        let candidates: Vec<usize> = (0..8).filter(|&i| !labeled[i]).collect();
        let mut active: Vec<RegionIdx> = (0..8).map(RegionIdx).collect();
        active.shuffle(&mut rng);
        let models: BTreeMap<PredicateId, PredicateModel> =
            [(p, PredicateModel { classifier: Some(model.clone()), ..PredicateModel::default() })].into();
        let got = best_object_for_predicate(p, &models, &active, |r| labeled[r.get()], &corpus, &mut rng);
        if candidates.is_empty() {
            assert!(got.is_err());
        } else {
            assert_eq!(got.unwrap().get(), brute_force_min_margin(&model, &rows, &candidates));
        }
    }
}

#[test]
fn untrained_predicate_picks_uniformly_among_unlabeled() {
    let rows = random_rows(&mut stream(1, &[]), 8, 2);
    let corpus = corpus_from_rows(&rows);
    let models: BTreeMap<PredicateId, PredicateModel> = BTreeMap::new();
    let active: Vec<RegionIdx> = (0..8).map(RegionIdx).collect();
    let mut rng = stream(2, &[]);
    let mut counts = [0usize; 8];
    for _ in 0..8000 {
        let r = best_object_for_predicate(PredicateId(0), &models, &active, |r| r.0 % 2 == 0, &corpus, &mut rng).unwrap();
        counts[r.get()] += 1;
    }
    assert!(counts.iter().step_by(2).all(|&c| c == 0));
    assert!(counts.iter().skip(1).step_by(2).all(|&c| (1700..2300).contains(&c)), "{counts:?}");
}

/// Exhaustive grounding: the weighted vote of every region, then the first
/// region (lowest index) reaching the maximum.
fn grounding_oracle(models: &[(LinearModel, f64)], rows: &[Vec<f64>], regions: &[usize]) -> (Vec<f64>, usize) {
    let d = rows[0].len();
    let scores: Vec<f64> = regions
        .iter()
        .map(|&r| {
            models
                .iter()
                .map(|(m, c)| {
                    let s = dot(&m.weights[..d], &rows[r]) + m.weights[d];
                    if s >= 0.0 {
                        *c
                    } else {
                        -*c
                    }
                })
                .sum()
        })
        .collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best = regions.iter().zip(&scores).filter(|(_, &s)| s == max).map(|(&r, _)| r).min().unwrap();
    (scores, best)
}

#[test]
fn grounding_matches_exhaustive_scoring() {
    let mut rng = stream(23, &[]);
    for _ in 0..1000 {
        let rows = random_rows(&mut rng, 4, 3);
        let corpus = corpus_from_rows(&rows);
        let k = rng.gen_range(1..=5);
        let mut regions: Vec<usize> = (0..4).collect();
        regions.shuffle(&mut rng);
        let mut models = BTreeMap::new();
        let mut raw = Vec::new();
        for p in 0..k {
            let weights: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f1 = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..1.0) };
            let m = LinearModel { weights };
            raw.push((m.clone(), f1));
            models.insert(PredicateId(p), PredicateModel { classifier: Some(m), f1, ..PredicateModel::default() });
        }
        let description: Vec<PredicateId> = (0..k).map(PredicateId).collect();
        let active: Vec<RegionIdx> = regions.iter().map(|&r| RegionIdx(r as u32)).collect();
        let got = score_objects(&description, &models, &active, &corpus);
        let (want_scores, want_best) = grounding_oracle(&raw, &rows, &regions);
        for (g, w) in got.weighted.iter().zip(&want_scores) {
            assert!((g - w).abs() < 1e-12);
        }
        assert_eq!(got.best().get(), want_best);

        let s = rng.gen_range(0.01..100.0);
        let scaled: Vec<f64> = got.confidences.iter().map(|c| c * s).collect();
        let rescored = GuessScores::from_decisions(&got.regions, &scaled, got.decisions.clone());
        assert_eq!(rescored.best(), got.best());
    }
}

proptest! {
    #[test]
    fn zero_confidence_predicates_do_not_change_the_guess(
        rows in prop::collection::vec(prop::collection::vec(prop_oneof![Just(-1.0), Just(1.0)], 4), 1..5),
        confidences in prop::collection::vec(0.0..1.0f64, 5),
        zero in any::<prop::sample::Index>(),
    ) {
        let regions: Vec<RegionIdx> = (0..4).map(RegionIdx).collect();
        let decisions: Vec<Vec<Label>> =
            rows.iter().map(|r| r.iter().map(|&s| Label::from_bool(s > 0.0)).collect()).collect();
        let mut conf = confidences[..rows.len()].to_vec();
        let z = zero.index(rows.len());
        conf[z] = 0.0;
        let full = GuessScores::from_decisions(&regions, &conf, decisions.clone());
        let mut fewer_d = decisions;
        fewer_d.remove(z);
        conf.remove(z);
        prop_assume!(!conf.is_empty());
        let fewer = GuessScores::from_decisions(&regions, &conf, fewer_d);
        prop_assert_eq!(full.best(), fewer.best());
    }

    #[test]
    fn triangular_weights_are_positive_and_bounded(c in 0.0..=1.0f64, w_min in 0.01..0.5f64, peak in 0.05..0.95f64) {
        let t = TriangularWeights { w_min, w_max: 1.0, c_max: peak };
        let w = t.weight(c);
        prop_assert!(w >= w_min - 1e-12 && w <= 1.0 + 1e-12);
        prop_assert!(w > 0.0);
    }

    #[test]
    fn sampled_predicates_are_distinct(n in 1usize..30, count in 1usize..5, seed in any::<u64>()) {
        let cands: Vec<PredicateId> = (0..n as u32).map(PredicateId).collect();
        let mut rng = stream(seed, &[]);
        let got = sample_predicates(&cands, |p| f64::from(p.0 % 10) / 10.0, count, &TriangularWeights::default(), &mut rng);
        let mut sorted = got.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(got.len(), count.min(n));
        prop_assert_eq!(sorted.len(), got.len());
    }
}

#[test]
fn triangular_endpoints_are_exact() {
    for t in [
        TriangularWeights::default(),
        TriangularWeights { w_min: 0.3, w_max: 2.7, c_max: 0.35 },
        TriangularWeights { w_min: 0.07, w_max: 0.9, c_max: 0.8 },
    ] {
        assert_eq!(t.weight(0.0), t.w_min);
        assert_eq!(t.weight(1.0), t.w_min);
        assert_eq!(t.weight(t.c_max), t.w_max);
    }
}

#[test]
fn triangular_draws_pass_chi_square() {
    let f1s = [0.0, 0.1, 0.25, 0.4, 0.55, 0.6, 0.7, 0.85, 0.95, 1.0];
    let cands: Vec<PredicateId> = (0..f1s.len() as u32).map(PredicateId).collect();
    let critical = ChiSquared::new((f1s.len() - 1) as f64).unwrap().inverse_cdf(0.99);
    let settings = [
        TriangularWeights::default(),
        TriangularWeights { w_min: 0.3, w_max: 1.0, c_max: 0.3 },
        TriangularWeights { w_min: 0.05, w_max: 2.0, c_max: 0.8 },
    ];
    for (i, t) in settings.iter().enumerate() {
        let weights: Vec<f64> = f1s.iter().map(|&c| t.weight(c)).collect();
        let total: f64 = weights.iter().sum();
        let n = 100_000;
        let mut counts = vec![0usize; f1s.len()];
        let mut rng = stream(100 + i as u64, &[]);
        for _ in 0..n {
            let p = sample_predicates(&cands, |p| f1s[p.0 as usize], 1, t, &mut rng)[0];
            counts[p.0 as usize] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&weights)
            .map(|(&o, w)| {
                let e = n as f64 * w / total;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        assert!(chi2 < critical, "setting {i}: chi2 {chi2} >= {critical}");
    }
}

#[test]
fn two_candidate_first_draw_follows_weights() {
    // Weights 1.0 and 0.1: the heavier one leads 10 times in 11.
    let cands = [PredicateId(0), PredicateId(1)];
    let f1 = |p: PredicateId| if p.0 == 0 { 0.6 } else { 0.0 };
    let mut rng = stream(5, &[]);
    let n = 50_000;
    let first = (0..n)
        .filter(|_| sample_predicates(&cands, f1, 1, &TriangularWeights::default(), &mut rng)[0] == cands[0])
        .count();
    let p = 10.0 / 11.0;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    assert!((first as f64 - n as f64 * p).abs() < 4.0 * sigma);
}
