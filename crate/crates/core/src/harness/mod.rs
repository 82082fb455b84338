//! The three-phase protocol: initialization on static-policy dialogs,
//! training, and testing on held-out predicates.

mod ablation;
mod batch;
mod config;
mod experiment;
mod stats;

pub use ablation::{compare, run_ablation, AblationReport, AblationRun, Comparison};
pub use batch::{
    finish_batch, run_batch, run_episode, sample_batch, Actor, BatchMetrics, BatchOutcome, Benchmark, EpisodeRecord,
    EpisodeRunner, Sequential,
};
pub use config::{Arm, ExperimentConfig, Phase, PhaseBatches};
pub use experiment::{no_query_floor, run_experiment, run_from, step_batch, Cursor, RunState};
pub use stats::{ln_gamma, regularized_incomplete_beta, student_t_two_sided, welch_t_test, WelchResult};
