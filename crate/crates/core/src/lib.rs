//! Opportunistic active learning for interactive object retrieval.
//!
//! An agent plays a sequence of short dialogs. In each one it sees eight
//! regions it may ask questions about and four regions among which it must
//! retrieve the one matching a short description. Questions are label
//! queries ("does `red` apply to this region?") and example queries ("show me
//! a `red` region"). Answers train one linear classifier per predicate, and the
//! classifiers ground future descriptions. A softmax policy trained with
//! REINFORCE decides when to ask and what to ask.
//!
//! This crate is `no_std` + `alloc`. File formats, checkpoints, the stemmer
//! backend and the command line live in the `oal` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod agent;
pub mod corpus;
pub mod env;
pub mod error;
pub mod grounding;
pub mod harness;
pub mod perception;
pub mod policy;
pub mod querygen;
pub mod rng;
pub mod text;

pub use agent::{AgentState, AgentStats, ModelView};
pub use corpus::{
    Corpus, CorpusSplit, Description, Interaction, PredicateId, Region, RegionIdx, RegionRecord,
    Side,
};
pub use env::{Action, Episode, EpisodeState, RewardConfig, UpdateMode};
pub use error::{Error, Result};
pub use grounding::GuessScores;
pub use perception::{DensityIndex, Label, LinearModel, PredicateModel, TrainConfig};
pub use policy::{FeatureMask, FeatureVector, PolicyParams, NUM_FEATURES};
pub use querygen::TriangularWeights;
