use alloc::string::String;
use alloc::vec::Vec;

use super::batch::{BatchMetrics, Benchmark, EpisodeRunner};
use super::config::{Arm, ExperimentConfig, Phase};
use super::experiment::{run_experiment, RunState};
use super::stats::{welch_t_test, WelchResult};
use crate::error::{Error, Result};
use crate::policy::FeatureMask;

/// One condition's final test batch beside the reference arms.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Comparison {
    pub condition: String,
    pub success_rate: f64,
    pub mean_length: f64,
    pub success_vs_static: Option<WelchResult>,
    pub success_vs_full: Option<WelchResult>,
    pub length_vs_static: Option<WelchResult>,
    pub length_vs_full: Option<WelchResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRun {
    pub condition: String,
    pub config: ExperimentConfig,
    pub state: RunState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub runs: Vec<AblationRun>,
    pub comparisons: Vec<Comparison>,
}

fn final_test(state: &RunState) -> Result<&BatchMetrics> {
    state
        .final_batch(Phase::Test)
        .ok_or_else(|| Error::Episode("run has no test batch".into()))
}

/// Welch comparison that reports degenerate samples as `None`.
pub fn compare(a: &[f64], b: &[f64]) -> Option<WelchResult> {
    welch_t_test(a, b).ok()
}

/// Runs the full policy, the static baseline, and the full policy with each
/// named ablation, all under the base config's seed.
pub fn run_ablation<S: AsRef<str>>(
    bench: &Benchmark,
    base: &ExperimentConfig,
    ablations: &[S],
    runner: &(dyn EpisodeRunner + Sync),
) -> Result<AblationReport> {
    for name in ablations {
        FeatureMask::from_names(&[name.as_ref()])?;
    }
    let mut conditions: Vec<(String, ExperimentConfig)> = Vec::new();
    conditions.push(("full".into(), ExperimentConfig { arm: Arm::Learned, ..base.clone() }));
    conditions.push(("static".into(), ExperimentConfig { arm: Arm::Static, ..base.clone() }));
    for name in ablations {
        let mut cfg = ExperimentConfig { arm: Arm::Learned, ..base.clone() };
        cfg.ablate.push(name.as_ref().into());
        conditions.push((alloc::format!("-{}", name.as_ref()), cfg));
    }
    let mut runs = Vec::new();
    for (condition, config) in conditions {
        let state = run_experiment(bench, &config, runner)?;
        runs.push(AblationRun { condition, config, state });
    }
    let full = final_test(&runs[0].state)?.clone();
    let stat = final_test(&runs[1].state)?.clone();
    let mut comparisons = Vec::new();
    for run in &runs {
        let m = final_test(&run.state)?;
        let (s, l) = (m.success_indicators(), m.length_values());
        comparisons.push(Comparison {
            condition: run.condition.clone(),
            success_rate: m.success_rate,
            mean_length: m.mean_length,
            success_vs_static: compare(&s, &stat.success_indicators()),
            success_vs_full: compare(&s, &full.success_indicators()),
            length_vs_static: compare(&l, &stat.length_values()),
            length_vs_full: compare(&l, &full.length_values()),
        });
    }
    Ok(AblationReport { runs, comparisons })
}
