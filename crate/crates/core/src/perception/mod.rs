//! Per-predicate classifiers learned from dialog labels.

mod classifier;
mod density;
mod f1;
mod model;

pub use classifier::{train_linear, LinearModel, TrainConfig};
pub use density::{density_stats, DensityConfig, DensityIndex, DensityStats};
pub use f1::{estimate_f1, f1_score, stratified_folds, Confusion};
pub use model::{Label, LabelConflict, PredicateModel};
