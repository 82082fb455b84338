mod common;

use oal_core::harness::{
    no_query_floor, run_experiment, run_from, sample_batch, welch_t_test, Arm, Cursor, Phase, RunState, Sequential,
};
use oal_core::rng::stream;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use common::{benchmark, small_config};

#[test]
fn identical_configs_give_identical_runs() {
    let cfg = small_config(10);
    let bench = benchmark(&cfg);
    let a = run_experiment(&bench, &cfg, &Sequential).unwrap();
    let b = run_experiment(&bench, &cfg, &Sequential).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.metrics.len(), 6);
}

#[test]
fn arms_share_interactions_and_the_init_phase() {
    let cfg = small_config(11);
    let bench = benchmark(&cfg);
    let learned = run_experiment(&bench, &cfg, &Sequential).unwrap();
    let fixed = run_experiment(&bench, &oal_core::harness::ExperimentConfig { arm: Arm::Static, ..cfg.clone() }, &Sequential).unwrap();
    let init = |s: &RunState| s.metrics.iter().filter(|m| m.phase == Phase::Init).cloned().collect::<Vec<_>>();
    assert_eq!(init(&learned), init(&fixed));
    let static_lengths_ok = fixed.metrics.iter().all(|m| m.lengths.iter().all(|&l| l == 16));
    assert!(static_lengths_ok);
    for phase in Phase::ALL {
        for b in 0..2 {
            let x = sample_batch(&bench, &cfg, phase, b).unwrap();
            let y = sample_batch(&bench, &oal_core::harness::ExperimentConfig { arm: Arm::Static, ..cfg.clone() }, phase, b).unwrap();
            assert_eq!(x, y);
        }
    }
}

#[test]
fn test_phase_restarts_from_fresh_classifiers() {
    let cfg = small_config(12);
    let bench = benchmark(&cfg);
    let full = run_experiment(&bench, &cfg, &Sequential).unwrap();

    let mut state = RunState::default();
    run_from(&bench, &cfg, &mut state, &Sequential, Some(4), &mut |_, _| Ok(())).unwrap();
    assert_eq!(state.cursor, Some(Cursor { phase: Phase::Test, batch: 0 }));
    let mut fresh = RunState::at(Cursor { phase: Phase::Test, batch: 0 }, state.policy.clone());
    run_from(&bench, &cfg, &mut fresh, &Sequential, None, &mut |_, _| Ok(())).unwrap();

    let test = |s: &RunState| s.metrics.iter().filter(|m| m.phase == Phase::Test).cloned().collect::<Vec<_>>();
    assert_eq!(test(&full), test(&fresh));
    assert_eq!(full.policy, fresh.policy);
    assert_eq!(full.policy, state.policy);
}

#[test]
fn policy_changes_only_outside_the_test_phase() {
    let cfg = small_config(13);
    let bench = benchmark(&cfg);
    let mut state = RunState::default();
    let mut thetas = Vec::new();
    run_from(&bench, &cfg, &mut state, &Sequential, None, &mut |s, o| {
        thetas.push((o.metrics.phase, s.policy.theta.clone()));
        Ok(())
    })
    .unwrap();
    let test: Vec<_> = thetas.iter().filter(|(p, _)| *p == Phase::Test).map(|(_, t)| t).collect();
    assert!(test.windows(2).all(|w| w[0] == w[1]));
    assert!(thetas.iter().any(|(_, t)| t.iter().any(|&x| x != 0.0)));
}

#[test]
fn no_query_floor_guesses_at_once() {
    let cfg = small_config(14);
    let bench = benchmark(&cfg);
    let floor = no_query_floor(&bench, &cfg, Phase::Test, 0, &Sequential).unwrap();
    assert!(floor.lengths.iter().all(|&l| l == 1));
    assert_eq!(floor.mean_queries, 0.0);
}

fn reference_welch(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let var = |x: &[f64]| {
        let m = mean(x);
        x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
    };
    let (va, vb) = (var(a) / a.len() as f64, var(b) / b.len() as f64);
    let t = (mean(a) - mean(b)) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    let p = 2.0 * StudentsT::new(0.0, 1.0, df).unwrap().cdf(-t.abs());
    (t, df, p)
}

#[test]
fn welch_matches_reference() {
    let mut rng = stream(15, &[]);
    for _ in 0..50 {
        let na = rng.gen_range(2..40);
        let nb = rng.gen_range(2..40);
        let shift = rng.gen_range(-2.0..2.0);
        let a: Vec<f64> = (0..na).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..nb).map(|_| rng.gen_range(-1.0..5.0) + shift).collect();
        let got = welch_t_test(&a, &b).unwrap();
        let (t, df, p) = reference_welch(&a, &b);
        assert!((got.t - t).abs() < 1e-6);
        assert!((got.df - df).abs() < 1e-6);
        assert!((got.p_two_sided - p).abs() < 1e-6, "p {} vs {p}", got.p_two_sided);
    }
}

#[test]
fn welch_worked_example() {
    let r = welch_t_test(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0, 8.0]).unwrap();
    assert!((r.t + 1.7320508).abs() < 1e-6);
    assert!((r.df - 4.4117647).abs() < 1e-6);
}
