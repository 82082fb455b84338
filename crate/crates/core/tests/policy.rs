use oal_core::env::{Action, TranscriptEntry};
use oal_core::policy::{
    action_probabilities, grad_log_prob, log_prob, reinforce_update, sample_action, softmax, PolicyConfig,
};
use oal_core::rng::stream;
use oal_core::{FeatureVector, PolicyParams, NUM_FEATURES};
use proptest::prelude::*;

fn feature_vector() -> impl Strategy<Value = FeatureVector> {
    prop::array::uniform28(prop_oneof![Just(0.0), -1.0..1.0f64]).prop_map(FeatureVector)
}

fn beam() -> impl Strategy<Value = Vec<FeatureVector>> {
    prop::collection::vec(feature_vector(), 1..8)
}

fn theta(scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, NUM_FEATURES)
}

/// Central difference along `theta[j]`, Richardson extrapolated from steps
/// `h` and `h / 2`.
fn central_difference(theta: &[f64], beam: &[FeatureVector], chosen: usize, j: usize) -> f64 {
    let d = |h: f64| {
        let (mut up, mut down) = (theta.to_vec(), theta.to_vec());
        up[j] += h;
        down[j] -= h;
        (log_prob(&up, beam, chosen) - log_prob(&down, beam, chosen)) / (2.0 * h)
    };
    (4.0 * d(5e-4) - d(1e-3)) / 3.0
}

proptest! {
    #[test]
    fn softmax_sums_to_one(logits in prop::collection::vec(-1e3..1e3f64, 1..12)) {
        let p = softmax(&logits);
        let total: f64 = p.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn softmax_ignores_constant_shifts(logits in prop::collection::vec(-50.0..50.0f64, 1..8), shift in -500.0..500.0f64) {
        let shifted: Vec<f64> = logits.iter().map(|l| l + shift).collect();
        for (a, b) in softmax(&logits).iter().zip(softmax(&shifted)) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn gradient_matches_finite_differences(t in theta(2.0), b in beam(), pick in any::<prop::sample::Index>()) {
        let chosen = pick.index(b.len());
        let g = grad_log_prob(&t, &b, chosen);
        for (j, gj) in g.iter().enumerate() {
            let fd = central_difference(&t, &b, chosen, j);
            let err = (gj - fd).abs();
            prop_assert!(err <= 1e-9 || err <= 1e-5 * gj.abs().max(fd.abs()), "index {j}: {gj} vs {fd}");
        }
    }

    #[test]
    fn expected_score_is_zero(t in theta(3.0), b in beam()) {
        let p = action_probabilities(&t, &b);
        let mut expected = [0.0; NUM_FEATURES];
        for (i, pi) in p.iter().enumerate() {
            for (e, g) in expected.iter_mut().zip(grad_log_prob(&t, &b, i)) {
                *e += pi * g;
            }
        }
        prop_assert!(expected.iter().all(|e| e.abs() < 1e-9));
    }

    #[test]
    fn zero_step_leaves_theta(t in theta(1.0), b in beam(), ret in -200.0..200.0f64) {
        let mut params = PolicyParams { theta: t.clone(), ..PolicyParams::default() };
        let entry = TranscriptEntry { turn: 0, beam: b, chosen: 0, action: Action::Guess, reward: ret };
        let cfg = PolicyConfig { alpha: 0.0, ..PolicyConfig::default() };
        reinforce_update(&mut params, &cfg, [(std::slice::from_ref(&entry), &[ret][..])]).unwrap();
        prop_assert_eq!(params.theta, t);
    }
}

#[test]
fn huge_logits_stay_normalized() {
    let theta = vec![1.0; NUM_FEATURES];
    let beam: Vec<FeatureVector> =
        [1e3, -1e3, 999.5, 0.0].iter().map(|&x| FeatureVector([x / NUM_FEATURES as f64; NUM_FEATURES])).collect();
    let p = action_probabilities(&theta, &beam);
    assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    assert!(p.iter().all(|x| x.is_finite()));
}

#[test]
fn sampling_follows_probabilities() {
    let probs = [0.5, 0.2, 0.2, 0.1];
    let mut rng = stream(11, &[]);
    let n = 100_000;
    let mut counts = [0usize; 4];
    for _ in 0..n {
        counts[sample_action(&probs, &mut rng)] += 1;
    }
    for (c, p) in counts.iter().zip(probs) {
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((*c as f64 - n as f64 * p).abs() < 4.0 * sigma, "{counts:?}");
    }
}

#[test]
fn zero_probability_is_never_sampled() {
    let probs = [0.0, 1.0, 0.0];
    let mut rng = stream(3, &[]);
    assert!((0..10_000).all(|_| sample_action(&probs, &mut rng) == 1));
}
