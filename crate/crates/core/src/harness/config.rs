use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::{InteractionSizes, SplitConfig};
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::perception::DensityConfig;
use crate::policy::{FeatureMask, PolicyConfig, StaticConfig};
use crate::querygen::{BeamConfig, TriangularWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Phase {
    Init,
    Train,
    Test,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Init, Phase::Train, Phase::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::Train => "train",
            Phase::Test => "test",
        }
    }

    pub fn code(self) -> u64 {
        self as u64
    }

    pub fn next(self) -> Option<Phase> {
        match self {
            Phase::Init => Some(Phase::Train),
            Phase::Train => Some(Phase::Test),
            Phase::Test => None,
        }
    }

    /// Whether the policy weights change after each batch.
    pub fn updates_policy(self) -> bool {
        self != Phase::Test
    }
}

/// Which policy acts in the training and test phases. The initialization
/// phase always runs the static policy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Arm {
    #[default]
    Learned,
    Static,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PhaseBatches {
    pub init: u32,
    pub train: u32,
    pub test: u32,
}

impl Default for PhaseBatches {
    fn default() -> Self {
        Self { init: 10, train: 10, test: 10 }
    }
}

impl PhaseBatches {
    pub fn get(&self, phase: Phase) -> u32 {
        match phase {
            Phase::Init => self.init,
            Phase::Train => self.train,
            Phase::Test => self.test,
        }
    }

    pub fn total(&self) -> u32 {
        self.init + self.train + self.test
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ExperimentConfig {
    pub seed: u64,
    pub arm: Arm,
    pub batches: PhaseBatches,
    pub batch_size: u32,
    pub interaction: InteractionSizes,
    pub split: SplitConfig,
    pub density: DensityConfig,
    pub env: EnvConfig,
    pub beam: BeamConfig,
    pub triangular: TriangularWeights,
    pub policy: PolicyConfig,
    pub static_policy: StaticConfig,
    /// Feature or group names zeroed in every feature vector.
    pub ablate: Vec<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            arm: Arm::Learned,
            batches: PhaseBatches::default(),
            batch_size: 100,
            interaction: InteractionSizes::default(),
            split: SplitConfig::default(),
            density: DensityConfig::default(),
            env: EnvConfig::default(),
            beam: BeamConfig::default(),
            triangular: TriangularWeights::default(),
            policy: PolicyConfig::default(),
            static_policy: StaticConfig::default(),
            ablate: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        for phase in Phase::ALL {
            if self.batches.get(phase) == 0 {
                return Err(Error::Config(alloc::format!("phase {} needs at least one batch", phase.as_str())));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.interaction.train == 0 || self.interaction.test == 0 {
            return Err(Error::Config("interaction set sizes must be positive".into()));
        }
        if self.env.t_max == 0 {
            return Err(Error::Config("t_max must be at least 1".into()));
        }
        if self.static_policy.n_queries > self.env.t_max {
            return Err(Error::Config("static n_queries exceeds t_max".into()));
        }
        if self.env.f1_folds < 2 {
            return Err(Error::Config("f1_folds must be at least 2".into()));
        }
        let c = &self.env.classifier;
        if !(c.lambda > 0.0 && c.lambda.is_finite()) || c.iterations == 0 {
            return Err(Error::Config("classifier needs lambda > 0 and iterations >= 1".into()));
        }
        if self.density.k == 0 {
            return Err(Error::Config("density k must be at least 1".into()));
        }
        self.env.rewards.validate()?;
        self.triangular.validate()?;
        self.policy.validate()?;
        self.mask()?;
        Ok(())
    }

    pub fn mask(&self) -> Result<FeatureMask> {
        FeatureMask::from_names(&self.ablate)
    }
}
