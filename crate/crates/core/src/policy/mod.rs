//! Action selection: the feature registry, the learned softmax policy and
//! the static baseline.

mod features;
mod softmax;
mod static_policy;

pub use features::{
    feature_index, featurize, guess_features, Applies, FeatureMask, FeatureSpec, FeatureVector, TurnFeatures, GROUPS,
    NUM_FEATURES, REGISTRY,
};
pub use softmax::{
    action_probabilities, grad_log_prob, log_prob, reinforce_update, sample_action, softmax, PolicyConfig,
    PolicyParams, UpdateReport,
};
pub use static_policy::{static_policy_act, StaticConfig};
